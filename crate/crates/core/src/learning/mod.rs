//! Gradient-based learners over the variational negative log-likelihood
//! `L(θ) = −θᵀw̄ + B(θ)`.
//!
//! - [`train_full_bp`]: BP to convergence on the whole graph every step.
//! - [`train_bbpl`]: block BP on one block per step with an incrementally
//!   maintained gradient.
//! - [`train_inner_dual`]: a single full BP sweep per step.
//! - [`train_crf_bbpl`]: BBPL over shared parameters `θ̃` of conditional or
//!   templated models.
//!
//! All trainers start from `θ = 0`, warm-start inference across iterations
//! and stop once `‖g‖_∞ < grad_tol`.

mod crf;
mod mrf;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inference::BpConfig;
use crate::math::inf_norm;

pub use crf::{crf_objective_and_gradient, train_crf_bbpl};
pub use mrf::{objective_and_gradient, train_bbpl, train_full_bp, train_inner_dual};

/// Step-size rule `α_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `α_0 / √(t + 1)`.
    InvSqrt(f64),
}

impl StepSchedule {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            Self::Constant(a) => a,
            Self::InvSqrt(a) => a / ((t + 1) as f64).sqrt(),
        }
    }

    fn base(&self) -> f64 {
        match *self {
            Self::Constant(a) | Self::InvSqrt(a) => a,
        }
    }
}

/// How BBPL picks the block of each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSchedule {
    Sequential,
    /// Uniform over blocks from a seeded generator.
    Random {
        seed: u64,
    },
}

impl FromStr for BlockSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sequential" {
            return Ok(Self::Sequential);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::Config(format!("bad seed in schedule `{s}`")))?;
            return Ok(Self::Random { seed });
        }
        Err(Error::Config(format!(
            "unknown block schedule `{s}` (expected sequential or random:SEED)"
        )))
    }
}

impl fmt::Display for BlockSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sequential => f.write_str("sequential"),
            Self::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

/// Block for iteration `t`: `t mod D` when sequential, a uniform draw
/// from `rng` when random.
pub fn select_block(schedule: BlockSchedule, t: usize, d: usize, rng: &mut ChaCha8Rng) -> usize {
    assert!(d >= 1, "partition must have at least one block");
    match schedule {
        BlockSchedule::Sequential => t % d,
        BlockSchedule::Random { .. } => rng.random_range(0..d),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub step: StepSchedule,
    /// Halve the step size whenever the recorded objective increases.
    pub backtracking: bool,
    pub max_outer_iters: usize,
    /// Stop once `‖g‖_∞` falls below this.
    pub grad_tol: f64,
    pub schedule: BlockSchedule,
    pub bp: BpConfig,
    /// Keep `θ_t` in every iteration record.
    pub record_theta: bool,
    /// Recompute the BBPL gradient from scratch each iteration and record
    /// its distance to the incrementally maintained one.
    pub audit_gradient: bool,
    /// Run full BP at every BBPL iterate to measure the block contraction.
    pub probe_contraction: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            step: StepSchedule::Constant(0.1),
            backtracking: false,
            max_outer_iters: 100_000,
            grad_tol: 1e-6,
            schedule: BlockSchedule::Sequential,
            bp: BpConfig::default(),
            record_theta: false,
            audit_gradient: false,
            probe_contraction: false,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step.base().is_nan() || self.step.base() <= 0.0 {
            return Err(Error::Config("step size must be > 0".into()));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(Error::Config("grad_tol must be > 0".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be ≥ 1".into()));
        }
        self.bp.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    FullBp,
    Bbpl,
    InnerDual,
    CrfBbpl,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullBp => "full",
            Self::Bbpl => "bbpl",
            Self::InnerDual => "inner-dual",
            Self::CrfBbpl => "crf-bbpl",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::FullBp),
            "bbpl" => Ok(Self::Bbpl),
            "inner-dual" => Ok(Self::InnerDual),
            "crf-bbpl" => Ok(Self::CrfBbpl),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected full, bbpl, inner-dual or crf-bbpl)"
            ))),
        }
    }
}

/// Raw distances behind one contraction ratio
/// `‖τ_t − τ*_t‖ / ‖τ_{t−1} − τ*_t‖`, where `τ*_t` is full BP at `θ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSample {
    pub after: f64,
    pub before: f64,
}

impl ContractionSample {
    /// Denominators below this make the ratio undefined.
    pub const MIN_DENOMINATOR: f64 = 1e-12;

    pub fn ratio(&self) -> Option<f64> {
        (self.before >= Self::MIN_DENOMINATOR).then(|| self.after / self.before)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// Variational objective at `θ_t` and the current beliefs.
    pub objective: f64,
    pub grad_inf_norm: f64,
    /// Message updates spent in this iteration.
    pub msg_updates: u64,
    pub msg_updates_cum: u64,
    pub inner_sweeps: usize,
    pub inner_converged: bool,
    /// Milliseconds since training started.
    pub wall_ms: f64,
    pub block_id: Option<usize>,
    pub step_size: f64,
    pub theta: Option<Vec<f64>>,
    pub incremental_error: Option<f64>,
    pub contraction: Option<ContractionSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningTrace {
    pub method: Method,
    pub records: Vec<IterationRecord>,
    /// Parameters when training stopped.
    pub theta: Vec<f64>,
    /// `‖g‖_∞ < grad_tol` was reached.
    pub converged: bool,
    /// Iterations whose inner inference hit its sweep cap.
    pub inner_failures: usize,
}

impl LearningTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn total_msg_updates(&self) -> u64 {
        self.records.last().map_or(0, |r| r.msg_updates_cum)
    }

    pub fn final_grad_norm(&self) -> Option<f64> {
        self.records.last().map(|r| r.grad_inf_norm)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }
}

/// What a learner reports after refreshing its beliefs at `θ_t`.
pub(crate) struct Observation {
    pub objective: f64,
    pub msg_updates: u64,
    pub inner_sweeps: usize,
    pub inner_converged: bool,
    pub block_id: Option<usize>,
    pub incremental_error: Option<f64>,
    pub contraction: Option<ContractionSample>,
}

pub(crate) trait Learner {
    /// Updates beliefs and the gradient for parameters `theta` at iteration `t`.
    fn observe(&mut self, t: usize, theta: &[f64]) -> Result<Observation>;
    fn gradient(&self) -> &[f64];
}

/// Outer loop shared by every trainer: observe, record, test, step.
pub(crate) fn drive(
    method: Method,
    mut theta: Vec<f64>,
    cfg: &LearnConfig,
    learner: &mut impl Learner,
) -> Result<LearningTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut cum = 0u64;
    let mut scale = 1.0;
    let mut converged = false;
    let mut inner_failures = 0;

    for t in 0..cfg.max_outer_iters {
        let obs = learner.observe(t, &theta)?;
        let grad = learner.gradient();
        let grad_inf_norm = inf_norm(grad);
        cum += obs.msg_updates;
        if !obs.inner_converged {
            inner_failures += 1;
        }
        if cfg.backtracking {
            if let Some(prev) = records.last() {
                if obs.objective > prev.objective {
                    scale *= 0.5;
                }
            }
        }
        let step_size = cfg.step.at(t) * scale;
        records.push(IterationRecord {
            t,
            objective: obs.objective,
            grad_inf_norm,
            msg_updates: obs.msg_updates,
            msg_updates_cum: cum,
            inner_sweeps: obs.inner_sweeps,
            inner_converged: obs.inner_converged,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            block_id: obs.block_id,
            step_size,
            theta: cfg.record_theta.then(|| theta.clone()),
            incremental_error: obs.incremental_error,
            contraction: obs.contraction,
        });
        if grad_inf_norm < cfg.grad_tol {
            converged = true;
            break;
        }
        for (p, g) in theta.iter_mut().zip(grad) {
            *p -= step_size * g;
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameters (step size too large?)"));
        }
    }

    Ok(LearningTrace {
        method,
        records,
        theta,
        converged,
        inner_failures,
    })
}
