//! Convex belief propagation and block belief propagation learning (BBPL)
//! for pairwise discrete Markov random fields and conditional random fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: graph topology, flat parameter/belief layout, sufficient
//!   statistics, feature models, file formats, exact-inference oracles and
//!   gauge canonicalization.
//! - [`inference`]: convex BP message/belief updates, full and block-restricted
//!   fixed-point iteration, and the variational objective.
//! - [`partition`]: vertex/edge block decompositions and the block scatter map.
//! - [`learning`]: full-BP learning, BBPL, the inner-dual baseline and the
//!   templated/CRF variant.
//! - [`synth`]: grid and Barabási–Albert generators, random true parameters
//!   and Gibbs sampling.
//! - [`eval`]: distance-to-optimum curves, Lyapunov calculator, contraction
//!   probes, work accounting and CSV traces.
//! - [`cli`]: experiment configuration and the `generate`/`train`/`compare`/
//!   `validate` commands behind the `bbpl` binary.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory.

pub mod cli;
pub mod error;
pub mod eval;
pub mod inference;
pub mod learning;
pub mod math;
pub mod model;
pub mod partition;
pub mod synth;

pub use error::{Error, Result};
pub use inference::{run_block_bp, run_bp, variational_objective, BpConfig, BpState};
pub use learning::{
    crf_objective_and_gradient, objective_and_gradient, train_bbpl, train_crf_bbpl, train_full_bp, train_inner_dual,
    BlockSchedule, LearnConfig, LearningTrace, Method, StepSchedule,
};
pub use model::{
    BeliefVector, CountingNumbers, CountingPreset, FeatureModel, GraphTopology, Layout, MessageSet, PotentialVector,
};
pub use partition::{Block, BlockPartition};
