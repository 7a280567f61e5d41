use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::GraphTopology;

macro_rules! flat_tables {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            values: Vec<f64>,
        }

        impl $name {
            pub fn zeros(graph: &GraphTopology) -> Self {
                Self { values: vec![0.0; graph.dim()] }
            }

            /// Wraps a flat vector in the graph's layout.
            pub fn from_flat(graph: &GraphTopology, values: Vec<f64>) -> Result<Self> {
                if values.len() != graph.dim() {
                    return Err(Error::Shape(format!(
                        "{} expects {} entries, got {}",
                        stringify!($name),
                        graph.dim(),
                        values.len()
                    )));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(stringify!($name)));
                }
                Ok(Self { values })
            }

            pub fn unary(&self, graph: &GraphTopology, vertex: usize) -> &[f64] {
                &self.values[graph.unary_range(vertex)]
            }

            pub fn unary_mut(&mut self, graph: &GraphTopology, vertex: usize) -> &mut [f64] {
                &mut self.values[graph.unary_range(vertex)]
            }

            /// Row-major `k_u × k_v` table of canonical edge `e = (u, v)`.
            pub fn pairwise(&self, graph: &GraphTopology, e: usize) -> &[f64] {
                &self.values[graph.pair_range(e)]
            }

            pub fn pairwise_mut(&mut self, graph: &GraphTopology, e: usize) -> &mut [f64] {
                &mut self.values[graph.pair_range(e)]
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.values
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }
        }
    };
}

flat_tables!(
    /// Unary and pairwise log-potential tables `θ`.
    PotentialVector
);

flat_tables!(
    /// Unary and pairwise pseudo-marginals `τ`.
    BeliefVector
);

impl BeliefVector {
    /// Uniform unary and pairwise tables.
    pub fn uniform(graph: &GraphTopology) -> Self {
        let mut b = Self::zeros(graph);
        for s in 0..graph.num_vertices() {
            let k = graph.num_states(s) as f64;
            b.unary_mut(graph, s).fill(1.0 / k);
        }
        for e in 0..graph.num_edges() {
            let len = graph.pair_range(e).len() as f64;
            b.pairwise_mut(graph, e).fill(1.0 / len);
        }
        b
    }

    /// Largest violation of nonnegativity and per-table normalization.
    pub fn simplex_violation(&self, graph: &GraphTopology) -> f64 {
        let mut worst: f64 = 0.0;
        let mut check = |t: &[f64]| {
            let neg = t.iter().fold(0.0f64, |m, &x| m.max(-x));
            let sum: f64 = t.iter().sum();
            worst = worst.max(neg).max((sum - 1.0).abs());
        };
        for s in 0..graph.num_vertices() {
            check(self.unary(graph, s));
        }
        for e in 0..graph.num_edges() {
            check(self.pairwise(graph, e));
        }
        worst
    }

    /// Largest `|Σ_{x_v} τ_uv(x_u, x_v) − τ_u(x_u)|` (and the symmetric
    /// column condition) over all edges: distance from the local polytope.
    pub fn consistency_violation(&self, graph: &GraphTopology) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            let (ku, kv) = (graph.num_states(u), graph.num_states(v));
            let pair = self.pairwise(graph, e);
            let tu = self.unary(graph, u);
            let tv = self.unary(graph, v);
            for a in 0..ku {
                let row: f64 = pair[a * kv..(a + 1) * kv].iter().sum();
                worst = worst.max((row - tu[a]).abs());
            }
            for b in 0..kv {
                let col: f64 = (0..ku).map(|a| pair[a * kv + b]).sum();
                worst = worst.max((col - tv[b]).abs());
            }
        }
        worst
    }
}

/// Directed edge messages `λ`; message `u → v` is a table over `x_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSet {
    values: Vec<f64>,
}

impl MessageSet {
    pub fn zeros(graph: &GraphTopology) -> Self {
        Self {
            values: vec![0.0; graph.message_len()],
        }
    }

    pub fn get(&self, graph: &GraphTopology, id: usize) -> &[f64] {
        &self.values[graph.message_range(id)]
    }

    pub fn get_mut(&mut self, graph: &GraphTopology, id: usize) -> &mut [f64] {
        &mut self.values[graph.message_range(id)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Built-in counting-number settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingPreset {
    /// `ρ_s = 1`, `ρ_uv = 1`: strictly concave entropy, convex upper bound.
    UniformConvex,
    /// `ρ_s = 1 − |N(s)|`, `ρ_uv = 1`: the Bethe entropy, exact on trees.
    Bethe,
}

impl FromStr for CountingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-convex" => Ok(Self::UniformConvex),
            "bethe" => Ok(Self::Bethe),
            other => Err(Error::Config(format!(
                "unknown counting preset `{other}` (expected uniform-convex or bethe)"
            ))),
        }
    }
}

impl std::fmt::Display for CountingPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::UniformConvex => "uniform-convex",
            Self::Bethe => "bethe",
        })
    }
}

/// Entropy weights of the approximate free energy
/// `Σ_s ρ_s H(τ_s) + Σ_uv ρ_uv H(τ_uv)`.
///
/// Belief updates use the vertex temperature `ρ_s + Σ_{v∈N(s)} ρ_sv`, which
/// is the coefficient the stationarity conditions put on `log τ_s` once the
/// edge entropies are expanded around their unary marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingNumbers {
    vertex: Vec<f64>,
    edge: Vec<f64>,
    temperature: Vec<f64>,
}

impl CountingNumbers {
    /// Requires every `ρ_uv > 0` and every vertex temperature `> 0`.
    pub fn new(graph: &GraphTopology, vertex: Vec<f64>, edge: Vec<f64>) -> Result<Self> {
        if vertex.len() != graph.num_vertices() || edge.len() != graph.num_edges() {
            return Err(Error::Shape(format!(
                "counting numbers need {} vertex and {} edge weights, got {} and {}",
                graph.num_vertices(),
                graph.num_edges(),
                vertex.len(),
                edge.len()
            )));
        }
        if vertex.iter().chain(&edge).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("counting numbers"));
        }
        if let Some(e) = edge.iter().position(|&r| r <= 0.0) {
            return Err(Error::Config(format!("edge counting number ρ[{e}] must be > 0")));
        }
        let temperature: Vec<f64> = (0..graph.num_vertices())
            .map(|s| vertex[s] + graph.neighbors(s).iter().map(|nb| edge[nb.edge]).sum::<f64>())
            .collect();
        if let Some(s) = temperature.iter().position(|&t| t <= 0.0) {
            return Err(Error::Config(format!(
                "vertex {s} has non-positive temperature {}",
                temperature[s]
            )));
        }
        Ok(Self {
            vertex,
            edge,
            temperature,
        })
    }

    pub fn uniform(graph: &GraphTopology, value: f64) -> Result<Self> {
        Self::new(graph, vec![value; graph.num_vertices()], vec![value; graph.num_edges()])
    }

    pub fn bethe(graph: &GraphTopology) -> Self {
        let vertex = (0..graph.num_vertices())
            .map(|s| 1.0 - graph.degree(s) as f64)
            .collect();
        Self::new(graph, vertex, vec![1.0; graph.num_edges()]).expect("Bethe temperatures are all 1")
    }

    pub fn preset(graph: &GraphTopology, preset: CountingPreset) -> Self {
        match preset {
            CountingPreset::UniformConvex => Self::uniform(graph, 1.0).expect("unit weights are valid"),
            CountingPreset::Bethe => Self::bethe(graph),
        }
    }

    pub fn vertex(&self, s: usize) -> f64 {
        self.vertex[s]
    }

    pub fn edge(&self, e: usize) -> f64 {
        self.edge[e]
    }

    pub fn temperature(&self, s: usize) -> f64 {
        self.temperature[s]
    }

    /// All weights strictly positive: the strongly concave regime.
    pub fn is_strictly_positive(&self) -> bool {
        self.vertex.iter().chain(&self.edge).all(|&r| r > 0.0)
    }
}
