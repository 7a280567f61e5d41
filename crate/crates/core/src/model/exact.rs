//! Brute-force exact inference by enumerating every joint assignment.
//!
//! These are the ground-truth oracles for tests and small experiments. They
//! share no code with message passing.

use crate::error::{Error, Result};
use crate::math::LogSumExp;
use crate::model::{BeliefVector, GraphTopology, PotentialVector};

/// Maximum number of joint assignments the oracles will enumerate.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

fn guard(graph: &GraphTopology) -> Result<()> {
    let size = graph.joint_state_count();
    if size > ENUMERATION_GUARD as f64 {
        return Err(Error::StateSpaceTooLarge {
            size,
            guard: ENUMERATION_GUARD,
        });
    }
    Ok(())
}

/// Unnormalized log-probability `Σ_s θ_s(x_s) + Σ_uv θ_uv(x_u, x_v)`.
pub fn score(graph: &GraphTopology, theta: &PotentialVector, x: &[usize]) -> f64 {
    let t = theta.as_slice();
    let layout = graph.layout();
    let unary: f64 = x
        .iter()
        .enumerate()
        .map(|(s, &xs)| t[layout.unary_offset(s) + xs])
        .sum();
    let pairwise: f64 = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| t[layout.pair_offset(e) + x[u] * graph.num_states(v) + x[v]])
        .sum();
    unary + pairwise
}

/// Visits every joint assignment in mixed-radix order with vertex 0 varying
/// fastest; the visit index is `Σ_s x_s Π_{t<s} k_t`.
pub fn for_each_assignment(graph: &GraphTopology, mut f: impl FnMut(&[usize])) {
    let states = graph.states();
    let mut x = vec![0usize; states.len()];
    loop {
        f(&x);
        let mut s = 0;
        loop {
            if s == x.len() {
                return;
            }
            x[s] += 1;
            if x[s] < states[s] {
                break;
            }
            x[s] = 0;
            s += 1;
        }
    }
}

/// Exact log partition function `A(θ)`.
pub fn exact_log_partition(graph: &GraphTopology, theta: &PotentialVector) -> Result<f64> {
    guard(graph)?;
    let mut acc = LogSumExp::default();
    for_each_assignment(graph, |x| acc.push(score(graph, theta, x)));
    Ok(acc.value())
}

/// Exact joint probabilities in [`for_each_assignment`] order.
pub fn exact_joint(graph: &GraphTopology, theta: &PotentialVector) -> Result<Vec<f64>> {
    let log_z = exact_log_partition(graph, theta)?;
    let mut probs = Vec::with_capacity(graph.joint_state_count() as usize);
    for_each_assignment(graph, |x| probs.push((score(graph, theta, x) - log_z).exp()));
    Ok(probs)
}

/// Exact unary and pairwise marginals of `p(x | θ)`.
pub fn exact_marginals(graph: &GraphTopology, theta: &PotentialVector) -> Result<BeliefVector> {
    let log_z = exact_log_partition(graph, theta)?;
    let layout = graph.layout();
    let mut out = vec![0.0; graph.dim()];
    for_each_assignment(graph, |x| {
        let p = (score(graph, theta, x) - log_z).exp();
        for (s, &xs) in x.iter().enumerate() {
            out[layout.unary_offset(s) + xs] += p;
        }
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            out[layout.pair_offset(e) + x[u] * graph.num_states(v) + x[v]] += p;
        }
    });
    BeliefVector::from_flat(graph, out)
}
