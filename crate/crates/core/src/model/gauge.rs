//! Gauge directions of the potential vector.
//!
//! Adding a constant to a unary or pairwise table, or moving `f(x_u)` from
//! `θ_u` into every row `x_u` of an incident pairwise table, changes the
//! score of every assignment by the same constant. These directions span
//! the subspace `N` along which neither the distribution nor the learning
//! objective changes. [`canonical_gauge`] removes the `N` component, so two
//! parameter vectors describe the same model exactly when their canonical
//! forms coincide.

use crate::model::{GraphTopology, PotentialVector};

/// One spanning direction of `N` as `(flat index, coefficient)` pairs.
fn generators(graph: &GraphTopology) -> Vec<Vec<(usize, f64)>> {
    let layout = graph.layout();
    let mut out = Vec::new();
    for s in 0..graph.num_vertices() {
        out.push(graph.unary_range(s).map(|i| (i, 1.0)).collect());
    }
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        out.push(graph.pair_range(e).map(|i| (i, 1.0)).collect());
        let (ku, kv) = (graph.num_states(u), graph.num_states(v));
        let base = layout.pair_offset(e);
        for xu in 0..ku {
            let mut g: Vec<(usize, f64)> = (0..kv).map(|xv| (base + xu * kv + xv, 1.0)).collect();
            g.push((layout.unary_offset(u) + xu, -1.0));
            out.push(g);
        }
        for xv in 0..kv {
            let mut g: Vec<(usize, f64)> = (0..ku).map(|xu| (base + xu * kv + xv, 1.0)).collect();
            g.push((layout.unary_offset(v) + xv, -1.0));
            out.push(g);
        }
    }
    out
}

/// Orthogonal projection of `theta` onto the complement of the gauge
/// subspace, by cyclic projections onto each generator's orthogonal
/// hyperplane until a sweep moves no entry by more than `1e-14 · (1 + ‖θ‖_∞)`.
pub fn canonical_gauge(graph: &GraphTopology, theta: &PotentialVector) -> PotentialVector {
    let gens = generators(graph);
    let mut x = theta.as_slice().to_vec();
    let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..100_000 {
        let mut moved = 0.0f64;
        for g in &gens {
            let norm2: f64 = g.iter().map(|(_, c)| c * c).sum();
            let proj: f64 = g.iter().map(|&(i, c)| c * x[i]).sum::<f64>() / norm2;
            for &(i, c) in g {
                x[i] -= proj * c;
            }
            moved = moved.max((proj * g.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()))).abs());
        }
        if moved <= 1e-14 * scale {
            break;
        }
    }
    PotentialVector::from_flat(graph, x).expect("projection keeps shape and finiteness")
}
