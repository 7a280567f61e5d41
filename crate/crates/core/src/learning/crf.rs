use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{drive, select_block, BlockSchedule, LearnConfig, Learner, LearningTrace, Method, Observation};
use crate::error::{Error, Result};
use crate::inference::{run_block_bp, run_bp, variational_objective, BpConfig, BpState};
use crate::math::inf_norm;
use crate::model::{ground_potentials, CountingNumbers, CrfDataset};
use crate::partition::{gather, BlockPartition};

struct CrfLearner<'a> {
    data: &'a CrfDataset,
    rho: &'a [CountingNumbers],
    partitions: &'a [BlockPartition],
    bp: BpConfig,
    schedule: BlockSchedule,
    rng: ChaCha8Rng,
    states: Vec<Option<BpState>>,
    grad: Vec<f64>,
    audit: bool,
}

impl CrfLearner<'_> {
    fn scratch_gradient(&self) -> Vec<f64> {
        let weight = 1.0 / self.data.len() as f64;
        let mut g: Vec<f64> = self.data.statistics().iter().map(|w| -w).collect();
        for (inst, state) in self.data.instances().iter().zip(&self.states) {
            let tau = state.as_ref().expect("state present between iterations");
            for (slot, m) in g.iter_mut().zip(inst.features.project(tau.beliefs.as_slice())) {
                *slot += weight * m;
            }
        }
        g
    }
}

impl Learner for CrfLearner<'_> {
    fn observe(&mut self, t: usize, shared: &[f64]) -> Result<Observation> {
        let d = self.partitions[0].num_blocks();
        let id = select_block(self.schedule, t, d, &mut self.rng);
        let weight = 1.0 / self.data.len() as f64;
        let mut objective = 0.0;
        let mut msg_updates = 0;
        let mut inner_sweeps = 0;
        let mut inner_converged = true;

        for (i, inst) in self.data.instances().iter().enumerate() {
            let graph = &inst.graph;
            let block = self.partitions[i].block(id);
            let theta = ground_potentials(graph, shared, &inst.features)?;
            let prev = self.states[i].take().expect("state present between iterations");
            let old = gather(prev.beliefs.as_slice(), block);
            let before = prev.msg_updates;
            let state = run_block_bp(graph, &theta, &self.rho[i], block, prev, &self.bp)?;
            let delta: Vec<f64> = gather(state.beliefs.as_slice(), block)
                .iter()
                .zip(&old)
                .map(|(new, old)| new - old)
                .collect();
            inst.features
                .project_sparse_into(block.flat_indices(), &delta, weight, &mut self.grad);
            objective +=
                weight * variational_objective(graph, &theta, &state.beliefs, &self.rho[i], inst.features.labels())?;
            msg_updates += state.msg_updates - before;
            inner_sweeps = inner_sweeps.max(state.iters_used);
            inner_converged &= state.converged;
            self.states[i] = Some(state);
        }

        let incremental_error = self.audit.then(|| {
            let scratch = self.scratch_gradient();
            inf_norm(&scratch.iter().zip(&self.grad).map(|(a, b)| a - b).collect::<Vec<_>>())
        });

        Ok(Observation {
            objective,
            msg_updates,
            inner_sweeps,
            inner_converged,
            block_id: Some(id),
            incremental_error,
            contraction: None,
        })
    }

    fn gradient(&self) -> &[f64] {
        &self.grad
    }
}

/// Averaged negative log-likelihood `(1/N) Σ_i L_i(θ̃)` and its gradient
/// `(1/N) Σ_i M_i τ*_i − w̄`, with every instance's inference run to
/// convergence from a cold start.
pub fn crf_objective_and_gradient(
    data: &CrfDataset,
    rho: &[CountingNumbers],
    shared: &[f64],
    bp: &BpConfig,
) -> Result<(f64, Vec<f64>)> {
    if rho.len() != data.len() {
        return Err(Error::Shape(format!(
            "{} instances need as many counting-number sets, got {}",
            data.len(),
            rho.len()
        )));
    }
    let weight = 1.0 / data.len() as f64;
    let mut objective = 0.0;
    let mut gradient: Vec<f64> = data.statistics().iter().map(|w| -w).collect();
    for (inst, rho) in data.instances().iter().zip(rho) {
        let theta = ground_potentials(&inst.graph, shared, &inst.features)?;
        let state = run_bp(&inst.graph, &theta, rho, bp, None)?;
        if !state.converged {
            return Err(Error::NotConverged {
                sweeps: state.iters_used,
            });
        }
        objective += weight * variational_objective(&inst.graph, &theta, &state.beliefs, rho, inst.features.labels())?;
        for (g, m) in gradient.iter_mut().zip(inst.features.project(state.beliefs.as_slice())) {
            *g += weight * m;
        }
    }
    Ok((objective, gradient))
}

/// BBPL over shared parameters `θ̃` of a conditional (templated) model.
///
/// Instance `i` has potentials `θ̃ᵀ M_i`, counting numbers `rho[i]` and
/// partition `partitions[i]`; all partitions must have the same number of
/// blocks, and iteration `t` runs block BP on block `F_t` of every
/// instance. The gradient of the averaged negative log-likelihood,
/// `(1/N) Σ M_i τ_i − w̄`, is maintained incrementally from the per-block
/// belief changes.
pub fn train_crf_bbpl(
    data: &CrfDataset,
    rho: &[CountingNumbers],
    partitions: &[BlockPartition],
    cfg: &LearnConfig,
) -> Result<LearningTrace> {
    let n = data.len();
    if rho.len() != n || partitions.len() != n {
        return Err(Error::Shape(format!(
            "{n} instances need {n} counting-number sets and partitions, got {} and {}",
            rho.len(),
            partitions.len()
        )));
    }
    let d = partitions[0].num_blocks();
    for (i, (inst, p)) in data.instances().iter().zip(partitions).enumerate() {
        if p.num_blocks() != d {
            return Err(Error::InvalidPartition(format!(
                "instance {i} has {} blocks, instance 0 has {d}",
                p.num_blocks()
            )));
        }
        if let Some(v) = p.validate(&inst.graph).first() {
            return Err(Error::InvalidPartition(format!("instance {i}: {v}")));
        }
    }
    let seed = match cfg.schedule {
        BlockSchedule::Random { seed } => seed,
        BlockSchedule::Sequential => 0,
    };
    let mut learner = CrfLearner {
        data,
        rho,
        partitions,
        bp: cfg.bp,
        schedule: cfg.schedule,
        rng: ChaCha8Rng::seed_from_u64(seed),
        states: data
            .instances()
            .iter()
            .map(|inst| Some(BpState::new(&inst.graph)))
            .collect(),
        grad: Vec::new(),
        audit: cfg.audit_gradient,
    };
    learner.grad = learner.scratch_gradient();
    drive(Method::CrfBbpl, vec![0.0; data.num_params()], cfg, &mut learner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{train_bbpl, StepSchedule};
    use crate::model::{CrfInstance, FeatureModel, GraphTopology};
    use crate::synth::gen_grid;

    #[test]
    fn identity_features_reduce_to_bbpl() {
        let g = gen_grid(2, 2);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let y = vec![0, 1, 1, 0];
        let features = FeatureModel::identity(&g, &y).unwrap();
        let w = features.labels().to_vec();
        let data = CrfDataset::new(vec![CrfInstance {
            graph: g.clone(),
            features,
        }])
        .unwrap();
        let part = BlockPartition::index(&g, 2).unwrap();
        let cfg = LearnConfig {
            max_outer_iters: 40,
            record_theta: true,
            ..LearnConfig::default()
        };
        let crf = train_crf_bbpl(&data, std::slice::from_ref(&rho), std::slice::from_ref(&part), &cfg).unwrap();
        let mrf = train_bbpl(&g, &w, &rho, &part, &cfg).unwrap();
        assert_eq!(crf.iterations(), mrf.iterations());
        for (a, b) in crf.records.iter().zip(&mrf.records) {
            assert_eq!(a.block_id, b.block_id);
            assert_eq!(a.msg_updates, b.msg_updates);
            let ta = a.theta.as_ref().unwrap();
            let tb = b.theta.as_ref().unwrap();
            assert!(ta.iter().zip(tb).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn scalar_parameter_matches_line_search() {
        // single vertex, k = 2, potentials (0, θ̃ x_i); labels are not separable
        let g = GraphTopology::uniform(1, 2, []).unwrap();
        let xs = [0.5, 2.0, -1.0];
        let ys = [1usize, 0, 0];
        let instances: Vec<CrfInstance> = xs
            .iter()
            .zip(ys)
            .map(|(&x, y)| {
                let labels = if y == 1 { vec![0.0, 1.0] } else { vec![1.0, 0.0] };
                CrfInstance {
                    graph: g.clone(),
                    features: FeatureModel::new(&g, 1, vec![0.0, x], labels).unwrap(),
                }
            })
            .collect();
        let data = CrfDataset::new(instances).unwrap();
        let rho = vec![CountingNumbers::uniform(&g, 1.0).unwrap(); 3];
        let parts = vec![BlockPartition::index(&g, 1).unwrap(); 3];
        let cfg = LearnConfig {
            step: StepSchedule::Constant(0.5),
            grad_tol: 1e-10,
            ..LearnConfig::default()
        };
        let trace = train_crf_bbpl(&data, &rho, &parts, &cfg).unwrap();
        assert!(trace.converged);

        let nll = |a: f64| -> f64 {
            xs.iter()
                .zip(ys)
                .map(|(&x, y)| (1.0 + (a * x).exp()).ln() - if y == 1 { a * x } else { 0.0 })
                .sum::<f64>()
                / 3.0
        };
        // golden-section search on the convex 1-D objective
        let (mut lo, mut hi) = (-20.0f64, 20.0f64);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if nll(a) < nll(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        assert!(
            (trace.theta[0] - 0.5 * (lo + hi)).abs() < 1e-6,
            "{} vs {}",
            trace.theta[0],
            lo
        );
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let g = gen_grid(1, 2);
        let features = FeatureModel::identity(&g, &[0, 0]).unwrap();
        let data = CrfDataset::new(vec![CrfInstance {
            graph: g.clone(),
            features,
        }])
        .unwrap();
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let cfg = LearnConfig::default();
        assert!(train_crf_bbpl(&data, &[], &[BlockPartition::index(&g, 1).unwrap()], &cfg).is_err());
        assert!(train_crf_bbpl(&data, &[rho], &[], &cfg).is_err());
    }
}
