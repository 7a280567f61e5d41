//! Graph structure, parameter and belief containers, sufficient statistics,
//! feature models, file formats and exact-inference oracles.

mod data;
pub mod exact;
pub mod frontier;
mod gauge;
mod graph;
pub mod io;
mod tables;

pub use data::{
    decode_labels, empirical_statistics, ground_potentials, sufficient_statistics, Assignment, CrfDataset, CrfInstance,
    FeatureModel, MrfDataset,
};
pub use exact::{exact_joint, exact_log_partition, exact_marginals, ENUMERATION_GUARD};
pub use frontier::{frontier_log_partition, frontier_marginals, frontier_width, FRONTIER_GUARD};
pub use gauge::canonical_gauge;
pub use graph::{GraphTopology, Layout, Neighbor};
pub use tables::{BeliefVector, CountingNumbers, CountingPreset, MessageSet, PotentialVector};
