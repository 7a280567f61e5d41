//! Lyapunov step-size calculator and the empirical contraction probe.

use bbpl::eval::{contraction_ratios, lyapunov_params, ContractionSummary, LyapunovConfig};
use bbpl::model::frontier_marginals;
use bbpl::synth::{gen_grid, gen_true_params};
use bbpl::{train_bbpl, BlockPartition, BpConfig, CountingNumbers, LearnConfig, StepSchedule};

fn main() -> bbpl::Result<()> {
    for (beta, eta, c) in [(1.0, 2.0, 0.5), (0.5, 4.0, 0.9), (2.0, 2.0, 0.1)] {
        let p = lyapunov_params(&LyapunovConfig { beta, eta, c })?;
        println!(
            "beta {beta}, eta {eta}, c {c}: gamma = {:.5}, alpha_max = {:.5}, delta(alpha_max / 2) = {:.5}",
            p.gamma,
            p.alpha_max,
            p.delta(p.alpha_max / 2.0)
        );
    }

    let g = gen_grid(5, 5);
    let stats = frontier_marginals(&g, &gen_true_params(&g, 0.5, 2))?.into_vec();
    let rho = CountingNumbers::uniform(&g, 1.0)?;
    let cfg = LearnConfig {
        step: StepSchedule::Constant(1.0),
        bp: BpConfig::with_tol(1e-10),
        probe_contraction: true,
        audit_gradient: true,
        ..LearnConfig::default()
    };
    let trace = train_bbpl(&g, &stats, &rho, &BlockPartition::grid(&g, 5, 5, 2, 2)?, &cfg)?;
    let ratios = contraction_ratios(&trace);
    let s = ContractionSummary::from_ratios(&ratios);
    let audit = trace
        .records
        .iter()
        .filter_map(|r| r.incremental_error)
        .fold(0.0, f64::max);
    println!(
        "BBPL on 5x5: {} iterations; r_t < 1 on {} of {} defined iterations; max incremental-gradient error {audit:.1e}",
        trace.iterations(),
        s.below_one,
        s.defined
    );
    Ok(())
}
