//! Work to reach a gradient tolerance as a function of the block count.

use bbpl::eval::work_report;
use bbpl::model::frontier_marginals;
use bbpl::synth::{gen_grid, gen_true_params};
use bbpl::{train_bbpl, BlockPartition, BpConfig, CountingNumbers, LearnConfig, StepSchedule};

fn main() -> bbpl::Result<()> {
    let g = gen_grid(8, 8);
    let stats = frontier_marginals(&g, &gen_true_params(&g, 0.5, 3))?.into_vec();
    let rho = CountingNumbers::uniform(&g, 1.0)?;
    let base = LearnConfig {
        bp: BpConfig::with_tol(1e-10),
        ..LearnConfig::default()
    };
    let tiles = [(1, 1), (1, 2), (2, 2), (2, 4), (4, 4)];
    let mut traces = Vec::new();
    let mut steps = Vec::new();
    for (r, c) in tiles {
        let d = r * c;
        let step = (4.0 / d as f64).min(0.5);
        let cfg = LearnConfig {
            step: StepSchedule::Constant(step),
            ..base.clone()
        };
        let partition = BlockPartition::grid(&g, 8, 8, r, c)?;
        traces.push((format!("D={d}"), train_bbpl(&g, &stats, &rho, &partition, &cfg)?));
        steps.push(step);
    }
    let labelled: Vec<_> = traces.iter().map(|(l, t)| (l.as_str(), t)).collect();
    println!(
        "{:<6} {:>6} {:>10} {:>14} {:>10}",
        "blocks", "step", "iterations", "msg updates", "wall ms"
    );
    for (row, step) in work_report(&labelled, base.grad_tol)?.iter().zip(steps) {
        println!(
            "{:<6} {:>6} {:>10} {:>14} {:>10.1}",
            row.label, step, row.iterations, row.msg_updates_cum, row.wall_ms
        );
    }
    Ok(())
}
