//! Wall-clock and message-update scaling of full-BP learning and BBPL on
//! growing grids. Run with `--release`.

use std::time::Instant;

use bbpl::synth::{gen_grid, gen_true_params};
use bbpl::{run_bp, train_bbpl, train_full_bp, BlockPartition, BpConfig, CountingNumbers, LearnConfig, StepSchedule};

fn main() -> bbpl::Result<()> {
    println!(
        "{:>6} {:>7} {:>12} {:>10} {:>12} {:>10}",
        "side", "blocks", "full msgs", "full ms", "bbpl msgs", "bbpl ms"
    );
    for side in [8, 16, 24, 32] {
        let g = gen_grid(side, side);
        let rho = CountingNumbers::uniform(&g, 1.0)?;
        let bp = BpConfig::with_tol(1e-8);
        let stats = run_bp(&g, &gen_true_params(&g, 0.5, 1), &rho, &bp, None)?
            .beliefs
            .into_vec();
        let tiles = side / 8;
        let d = tiles * tiles;
        let base = LearnConfig {
            bp,
            grad_tol: 1e-5,
            ..LearnConfig::default()
        };
        let full_cfg = LearnConfig {
            step: StepSchedule::Constant(1.0),
            ..base.clone()
        };
        let block_cfg = LearnConfig {
            step: StepSchedule::Constant(1.0 / d as f64),
            ..base
        };

        let start = Instant::now();
        let full = train_full_bp(&g, &stats, &rho, &full_cfg)?;
        let full_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let bbpl = train_bbpl(
            &g,
            &stats,
            &rho,
            &BlockPartition::grid(&g, side, side, tiles, tiles)?,
            &block_cfg,
        )?;
        let bbpl_ms = start.elapsed().as_secs_f64() * 1e3;
        println!(
            "{side:>6} {d:>7} {:>12} {full_ms:>10.0} {:>12} {bbpl_ms:>10.0}",
            full.total_msg_updates(),
            bbpl.total_msg_updates()
        );
    }
    Ok(())
}
