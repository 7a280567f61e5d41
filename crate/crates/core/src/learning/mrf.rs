use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    drive, select_block, BlockSchedule, ContractionSample, LearnConfig, Learner, LearningTrace, Method, Observation,
};
use crate::error::{Error, Result};
use crate::inference::{run_block_bp, run_bp, variational_objective, BpConfig, BpState};
use crate::math::{inf_norm, l2_distance};
use crate::model::{CountingNumbers, GraphTopology, PotentialVector};
use crate::partition::{gather, scatter_update, BlockPartition};

fn check_stats(graph: &GraphTopology, stats: &[f64]) -> Result<()> {
    if stats.len() != graph.dim() {
        return Err(Error::Shape(format!(
            "statistics have length {}, graph layout has {}",
            stats.len(),
            graph.dim()
        )));
    }
    Ok(())
}

fn take_state(slot: &mut Option<BpState>, graph: &GraphTopology) -> BpState {
    slot.take().unwrap_or_else(|| BpState::new(graph))
}

/// `L(θ)` and `∇L(θ) = τ*(θ) − w̄` with inference run to convergence from
/// a cold start.
pub fn objective_and_gradient(
    graph: &GraphTopology,
    stats: &[f64],
    rho: &CountingNumbers,
    theta: &PotentialVector,
    bp: &BpConfig,
) -> Result<(f64, Vec<f64>)> {
    check_stats(graph, stats)?;
    let state = run_bp(graph, theta, rho, bp, None)?;
    if !state.converged {
        return Err(Error::NotConverged {
            sweeps: state.iters_used,
        });
    }
    let objective = variational_objective(graph, theta, &state.beliefs, rho, stats)?;
    let gradient = state.beliefs.as_slice().iter().zip(stats).map(|(t, w)| t - w).collect();
    Ok((objective, gradient))
}

/// Full-graph inference each iteration; with `max_sweeps = Some(1)` this is
/// the inner-dual baseline.
struct FullLearner<'a> {
    graph: &'a GraphTopology,
    stats: &'a [f64],
    rho: &'a CountingNumbers,
    bp: BpConfig,
    state: Option<BpState>,
    grad: Vec<f64>,
}

impl Learner for FullLearner<'_> {
    fn observe(&mut self, _t: usize, theta: &[f64]) -> Result<Observation> {
        let theta = PotentialVector::from_flat(self.graph, theta.to_vec())?;
        let warm = take_state(&mut self.state, self.graph);
        let before = warm.msg_updates;
        let state = run_bp(self.graph, &theta, self.rho, &self.bp, Some(warm))?;
        for ((g, &tau), &w) in self.grad.iter_mut().zip(state.beliefs.as_slice()).zip(self.stats) {
            *g = tau - w;
        }
        let obs = Observation {
            objective: variational_objective(self.graph, &theta, &state.beliefs, self.rho, self.stats)?,
            msg_updates: state.msg_updates - before,
            inner_sweeps: state.iters_used,
            inner_converged: state.converged,
            block_id: None,
            incremental_error: None,
            contraction: None,
        };
        self.state = Some(state);
        Ok(obs)
    }

    fn gradient(&self) -> &[f64] {
        &self.grad
    }
}

/// Full-BP learning: BP to convergence at every step, gradient
/// `τ*(θ_t) − w̄`.
pub fn train_full_bp(
    graph: &GraphTopology,
    stats: &[f64],
    rho: &CountingNumbers,
    cfg: &LearnConfig,
) -> Result<LearningTrace> {
    check_stats(graph, stats)?;
    let mut learner = FullLearner {
        graph,
        stats,
        rho,
        bp: cfg.bp,
        state: None,
        grad: vec![0.0; graph.dim()],
    };
    drive(Method::FullBp, vec![0.0; graph.dim()], cfg, &mut learner)
}

/// Inner-dual learning: exactly one sweep over all directed edges per step,
/// then a gradient step with the current (unconverged) beliefs.
pub fn train_inner_dual(
    graph: &GraphTopology,
    stats: &[f64],
    rho: &CountingNumbers,
    cfg: &LearnConfig,
) -> Result<LearningTrace> {
    check_stats(graph, stats)?;
    let mut learner = FullLearner {
        graph,
        stats,
        rho,
        bp: BpConfig { max_iters: 1, ..cfg.bp },
        state: None,
        grad: vec![0.0; graph.dim()],
    };
    let mut trace = drive(Method::InnerDual, vec![0.0; graph.dim()], cfg, &mut learner)?;
    // a single sweep never "converges" in the BP sense
    trace.inner_failures = 0;
    for r in &mut trace.records {
        r.inner_converged = true;
    }
    Ok(trace)
}

struct BlockLearner<'a> {
    graph: &'a GraphTopology,
    stats: &'a [f64],
    rho: &'a CountingNumbers,
    partition: &'a BlockPartition,
    bp: BpConfig,
    schedule: BlockSchedule,
    rng: ChaCha8Rng,
    state: Option<BpState>,
    grad: Vec<f64>,
    audit: bool,
    probe: Option<Option<BpState>>,
}

impl Learner for BlockLearner<'_> {
    fn observe(&mut self, t: usize, theta: &[f64]) -> Result<Observation> {
        let theta = PotentialVector::from_flat(self.graph, theta.to_vec())?;
        let id = select_block(self.schedule, t, self.partition.num_blocks(), &mut self.rng);
        let block = self.partition.block(id);
        let prev = take_state(&mut self.state, self.graph);

        let reference = match self.probe.as_mut() {
            Some(slot) => {
                let r = run_bp(self.graph, &theta, self.rho, &self.bp, slot.take())?;
                let before = l2_distance(prev.beliefs.as_slice(), r.beliefs.as_slice());
                Some((r, before))
            }
            None => None,
        };

        let count_before = prev.msg_updates;
        let state = run_block_bp(self.graph, &theta, self.rho, block, prev, &self.bp)?;

        // in-place incremental gradient: only the block's coordinates move
        let sub: Vec<f64> = gather(state.beliefs.as_slice(), block)
            .into_iter()
            .zip(block.flat_indices())
            .map(|(tau, &i)| tau - self.stats[i])
            .collect();
        scatter_update(&mut self.grad, block, &sub)?;

        let incremental_error = self.audit.then(|| {
            let scratch: Vec<f64> = state
                .beliefs
                .as_slice()
                .iter()
                .zip(self.stats)
                .map(|(tau, w)| tau - w)
                .collect();
            inf_norm(&scratch.iter().zip(&self.grad).map(|(a, b)| a - b).collect::<Vec<_>>())
        });

        let contraction = reference.map(|(r, before)| {
            let after = l2_distance(state.beliefs.as_slice(), r.beliefs.as_slice());
            if let Some(slot) = self.probe.as_mut() {
                *slot = Some(r);
            }
            ContractionSample { after, before }
        });

        let obs = Observation {
            objective: variational_objective(self.graph, &theta, &state.beliefs, self.rho, self.stats)?,
            msg_updates: state.msg_updates - count_before,
            inner_sweeps: state.iters_used,
            inner_converged: state.converged,
            block_id: Some(id),
            incremental_error,
            contraction,
        };
        self.state = Some(state);
        Ok(obs)
    }

    fn gradient(&self) -> &[f64] {
        &self.grad
    }
}

/// Block belief propagation learning.
///
/// Each iteration selects a block `F_t`, runs block BP on it to convergence
/// with everything else frozen, overwrites the block's gradient coordinates
/// with `τ^(F_t) − w̄^(F_t)` and steps. The gradient starts at `τ_0 − w̄` for
/// the uniform initial beliefs.
pub fn train_bbpl(
    graph: &GraphTopology,
    stats: &[f64],
    rho: &CountingNumbers,
    partition: &BlockPartition,
    cfg: &LearnConfig,
) -> Result<LearningTrace> {
    check_stats(graph, stats)?;
    if let Some(v) = partition.validate(graph).first() {
        return Err(Error::InvalidPartition(v.to_string()));
    }
    let initial = BpState::new(graph);
    let grad = initial
        .beliefs
        .as_slice()
        .iter()
        .zip(stats)
        .map(|(tau, w)| tau - w)
        .collect();
    let seed = match cfg.schedule {
        BlockSchedule::Random { seed } => seed,
        BlockSchedule::Sequential => 0,
    };
    let mut learner = BlockLearner {
        graph,
        stats,
        rho,
        partition,
        bp: cfg.bp,
        schedule: cfg.schedule,
        rng: ChaCha8Rng::seed_from_u64(seed),
        state: Some(initial),
        grad,
        audit: cfg.audit_gradient,
        probe: cfg.probe_contraction.then_some(None),
    };
    drive(Method::Bbpl, vec![0.0; graph.dim()], cfg, &mut learner)
}
