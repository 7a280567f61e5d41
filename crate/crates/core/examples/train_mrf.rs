//! MRF learning with full BP, BBPL and the inner-dual method on a 6x6 grid,
//! with optima compared modulo gauge.

use bbpl::model::{canonical_gauge, frontier_marginals};
use bbpl::synth::{gen_grid, gen_true_params};
use bbpl::{
    train_bbpl, train_full_bp, train_inner_dual, BlockPartition, BpConfig, CountingNumbers, LearnConfig, LearningTrace,
    PotentialVector, StepSchedule,
};

fn main() -> bbpl::Result<()> {
    let g = gen_grid(6, 6);
    let stats = frontier_marginals(&g, &gen_true_params(&g, 0.5, 11))?.into_vec();
    let rho = CountingNumbers::uniform(&g, 1.0)?;
    let cfg = LearnConfig {
        step: StepSchedule::Constant(1.0),
        bp: BpConfig::with_tol(1e-10),
        ..LearnConfig::default()
    };
    let partition = BlockPartition::grid(&g, 6, 6, 2, 2)?;
    let runs = [
        train_full_bp(&g, &stats, &rho, &cfg)?,
        train_bbpl(&g, &stats, &rho, &partition, &cfg)?,
        train_inner_dual(&g, &stats, &rho, &cfg)?,
    ];
    for t in &runs {
        println!(
            "{:<10} converged {:<5} iterations {:>5} message updates {:>8} objective {:.8}",
            t.method.to_string(),
            t.converged,
            t.iterations(),
            t.total_msg_updates(),
            t.final_objective().unwrap_or(f64::NAN)
        );
    }
    let canon = |t: &LearningTrace| -> bbpl::Result<Vec<f64>> {
        Ok(canonical_gauge(&g, &PotentialVector::from_flat(&g, t.theta.clone())?).into_vec())
    };
    let reference = canon(&runs[0])?;
    for t in &runs[1..] {
        let d = bbpl::math::l2_distance(&canon(t)?, &reference) / bbpl::math::l2_norm(&reference);
        println!(
            "{} vs full: relative distance {d:.2e} after gauge canonicalization",
            t.method
        );
    }
    Ok(())
}
