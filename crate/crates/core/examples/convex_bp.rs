//! Convex BP on a loopy grid and a tree: beliefs, the free-energy bound and
//! the exact log-partition function.

use bbpl::inference::free_energy_bound;
use bbpl::model::exact::{exact_log_partition, exact_marginals};
use bbpl::synth::{gen_grid, gen_true_params};
use bbpl::{run_bp, BpConfig, CountingNumbers, GraphTopology};

fn report(name: &str, g: &GraphTopology, rho: &CountingNumbers) -> bbpl::Result<()> {
    let theta = gen_true_params(g, 1.0, 3);
    let st = run_bp(g, &theta, rho, &BpConfig::with_tol(1e-10), None)?;
    let bound = free_energy_bound(g, &theta, &st.beliefs, rho)?;
    let exact = exact_log_partition(g, &theta)?;
    let err = st
        .beliefs
        .as_slice()
        .iter()
        .zip(exact_marginals(g, &theta)?.as_slice())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!(
        "{name:<28} sweeps {:>4}  messages {:>6}  B = {bound:.6}  A = {exact:.6}  max belief error {err:.2e}",
        st.iters_used, st.msg_updates
    );
    Ok(())
}

fn main() -> bbpl::Result<()> {
    let grid = gen_grid(3, 3);
    report(
        "3x3 grid, uniform convex",
        &grid,
        &CountingNumbers::uniform(&grid, 1.0)?,
    )?;
    report("3x3 grid, rho = 0.5", &grid, &CountingNumbers::uniform(&grid, 0.5)?)?;
    report("3x3 grid, bethe", &grid, &CountingNumbers::bethe(&grid))?;
    let tree = GraphTopology::uniform(7, 3, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])?;
    report("binary tree, bethe (exact)", &tree, &CountingNumbers::bethe(&tree))?;
    Ok(())
}
