//! Conditional model with shared templated parameters, trained with CRF-BBPL
//! and with single-block inference.

use bbpl::model::CrfDataset;
use bbpl::synth::{gen_grid, gen_templated_instance, templated_dim, GibbsConfig};
use bbpl::{train_crf_bbpl, BlockPartition, BpConfig, CountingNumbers, LearnConfig, StepSchedule};

fn main() -> bbpl::Result<()> {
    let g = gen_grid(5, 5);
    let truth = [0.5, -0.5, 0.0, 0.0, 0.2, -0.2, -0.2, 0.2];
    assert_eq!(truth.len(), templated_dim(2));
    let instances = (0..3)
        .map(|i| {
            gen_templated_instance(
                &g,
                &truth,
                &GibbsConfig {
                    seed: 100 + i,
                    ..GibbsConfig::default()
                },
                i,
            )
        })
        .collect::<bbpl::Result<Vec<_>>>()?;
    let data = CrfDataset::new(instances)?;
    let rho = vec![CountingNumbers::uniform(&g, 1.0)?; data.len()];
    let cfg = LearnConfig {
        step: StepSchedule::Constant(0.05),
        bp: BpConfig::with_tol(1e-10),
        ..LearnConfig::default()
    };
    for (label, partition) in [
        ("1 block", BlockPartition::index(&g, 1)?),
        ("4 blocks", BlockPartition::grid(&g, 5, 5, 2, 2)?),
    ] {
        let parts = vec![partition; data.len()];
        let t = train_crf_bbpl(&data, &rho, &parts, &cfg)?;
        let theta: Vec<String> = t.theta.iter().map(|x| format!("{x:+.3}")).collect();
        println!(
            "{label:<8} converged {} after {} iterations, {} message updates\n         theta = [{}]",
            t.converged,
            t.iterations(),
            t.total_msg_updates(),
            theta.join(", ")
        );
    }
    Ok(())
}
