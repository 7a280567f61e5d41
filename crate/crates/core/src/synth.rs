//! Synthetic experiment assets: grid and Barabási–Albert graphs, Gaussian
//! true parameters and single-site Gibbs sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::softmax_in_place;
use crate::model::{
    ground_potentials, sufficient_statistics, Assignment, CrfInstance, FeatureModel, GraphTopology, PotentialVector,
};

/// Graph family of a synthetic problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Grid { rows: usize, cols: usize },
    BarabasiAlbert { n: usize, m: usize },
}

impl FromStr for GraphKind {
    type Err = Error;

    /// `grid:RxC` or `ba:N:M`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid graph spec `{s}` (expected grid:RxC or ba:N:M)"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let (a, b) = match kind {
            "grid" => arg.split_once('x'),
            "ba" => arg.split_once(':'),
            _ => None,
        }
        .ok_or_else(bad)?;
        let a = a.parse().map_err(|_| bad())?;
        let b = b.parse().map_err(|_| bad())?;
        Ok(if kind == "grid" {
            Self::Grid { rows: a, cols: b }
        } else {
            Self::BarabasiAlbert { n: a, m: b }
        })
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            Self::BarabasiAlbert { n, m } => write!(f, "ba:{n}:{m}"),
        }
    }
}

impl GraphKind {
    /// `(rows, cols)` for grids.
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        match *self {
            Self::Grid { rows, cols } => Some((rows, cols)),
            Self::BarabasiAlbert { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GraphKind,
    /// States per vertex.
    pub k: usize,
    pub seed: u64,
    /// Standard deviation of the true potentials.
    pub param_scale: f64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GraphKind::Grid { rows, cols } if rows == 0 || cols == 0 => {
                return Err(Error::Config("grid dimensions must be ≥ 1".into()))
            }
            GraphKind::BarabasiAlbert { n, m } if m == 0 || n <= m => {
                return Err(Error::Config(format!("BA graph needs n > m ≥ 1, got n={n}, m={m}")))
            }
            _ => {}
        }
        if self.k < 2 {
            return Err(Error::Config("need at least 2 states per vertex".into()));
        }
        if self.param_scale.is_nan() || self.param_scale <= 0.0 {
            return Err(Error::Config("param_scale must be > 0".into()));
        }
        Ok(())
    }

    /// Builds the graph (with all vertices at `k` states) and true
    /// parameters. The graph uses `seed` and the parameters `seed + 1`.
    pub fn generate(&self) -> Result<(GraphTopology, PotentialVector)> {
        self.validate()?;
        let shape = match self.kind {
            GraphKind::Grid { rows, cols } => gen_grid(rows, cols),
            GraphKind::BarabasiAlbert { n, m } => gen_ba(n, m, self.seed)?,
        };
        let graph = GraphTopology::uniform(shape.num_vertices(), self.k, shape.edges().iter().copied())?;
        let theta = gen_true_params(&graph, self.param_scale, self.seed.wrapping_add(1));
        Ok((graph, theta))
    }
}

/// 4-connected `rows × cols` lattice with binary states; vertex `r·cols + c`.
pub fn gen_grid(rows: usize, cols: usize) -> GraphTopology {
    gen_grid_with_states(rows, cols, 2)
}

pub fn gen_grid_with_states(rows: usize, cols: usize, k: usize) -> GraphTopology {
    let mut edges = Vec::with_capacity(rows * cols.saturating_sub(1) + cols * rows.saturating_sub(1));
    for r in 0..rows {
        for c in 0..cols {
            let s = r * cols + c;
            if c + 1 < cols {
                edges.push((s, s + 1));
            }
            if r + 1 < rows {
                edges.push((s, s + cols));
            }
        }
    }
    GraphTopology::uniform(rows * cols, k, edges).expect("grid construction is valid")
}

/// Preferential-attachment graph with binary states.
///
/// Starts from the complete graph on `m + 1` vertices; each later vertex
/// joins `m` distinct existing vertices chosen with probability proportional
/// to degree. Vertex indices follow generation order.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<GraphTopology> {
    if m == 0 || n <= m {
        return Err(Error::Config(format!("BA graph needs n > m ≥ 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // every edge contributes both endpoints, so uniform draws from this
    // list are degree-proportional
    let mut endpoints = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    GraphTopology::uniform(n, 2, edges)
}

/// I.i.d. `N(0, scale²)` entries for every unary and pairwise table.
pub fn gen_true_params(graph: &GraphTopology, scale: f64, seed: u64) -> PotentialVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale).expect("scale must be finite and positive");
    let values = (0..graph.dim()).map(|_| normal.sample(&mut rng)).collect();
    PotentialVector::from_flat(graph, values).expect("Gaussian draws are finite")
}

/// Number of shared parameters of [`templated_features`] for `k` states.
pub fn templated_dim(k: usize) -> usize {
    2 * k + k * k
}

/// Templated features for a graph whose vertices all have `k` states.
///
/// The shared parameter is `[w_0..w_k, b_0..b_k, P]`: unary entry
/// `θ_s(x) = w_x z_s + b_x` for a scalar covariate `z_s`, and every edge
/// shares the `k × k` table `P` (row-major). Labels come from `assignment`.
pub fn templated_features(graph: &GraphTopology, covariate: &[f64], assignment: &[usize]) -> Result<FeatureModel> {
    let k = graph.num_states(0);
    if graph.states().iter().any(|&ks| ks != k) {
        return Err(Error::Shape(
            "templated features need the same state count at every vertex".into(),
        ));
    }
    if covariate.len() != graph.num_vertices() {
        return Err(Error::Shape(format!(
            "need one covariate per vertex ({}), got {}",
            graph.num_vertices(),
            covariate.len()
        )));
    }
    let d = graph.dim();
    let params = templated_dim(k);
    let mut m = vec![0.0; params * d];
    let layout = graph.layout();
    for (s, &z) in covariate.iter().enumerate() {
        for x in 0..k {
            let j = layout.unary_offset(s) + x;
            m[x * d + j] = z;
            m[(k + x) * d + j] = 1.0;
        }
    }
    for e in 0..graph.num_edges() {
        for (c, j) in graph.pair_range(e).enumerate() {
            m[(2 * k + c) * d + j] = 1.0;
        }
    }
    FeatureModel::new(graph, params, m, sufficient_statistics(graph, assignment)?)
}

/// A templated instance on `graph`: covariates `z_s ~ N(0, 1)` and labels
/// drawn by Gibbs sampling from the potentials grounded at `shared_true`.
/// Covariates use `seed`, the chain `gibbs` with its own seed.
pub fn gen_templated_instance(
    graph: &GraphTopology,
    shared_true: &[f64],
    gibbs: &GibbsConfig,
    seed: u64,
) -> Result<CrfInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let z: Vec<f64> = (0..graph.num_vertices()).map(|_| normal.sample(&mut rng)).collect();
    let placeholder = vec![0; graph.num_vertices()];
    let features = templated_features(graph, &z, &placeholder)?;
    let theta = ground_potentials(graph, shared_true, &features)?;
    let labels = gibbs_sample(graph, &theta, &GibbsConfig { samples: 1, ..*gibbs })?.remove(0);
    Ok(CrfInstance {
        graph: graph.clone(),
        features: templated_features(graph, &z, &labels)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    pub samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            samples: 20,
            burn_in: 1000,
            thin: 10,
            seed: 0,
        }
    }
}

/// Single-site Gibbs sampling with sweeps in vertex order.
///
/// The chain starts from a uniformly random assignment, discards `burn_in`
/// sweeps, then records the state after every `thin`-th sweep.
pub fn gibbs_sample(graph: &GraphTopology, theta: &PotentialVector, cfg: &GibbsConfig) -> Result<Vec<Assignment>> {
    if cfg.samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    if cfg.thin == 0 {
        return Err(Error::Config("thin must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Assignment = graph.states().iter().map(|&k| rng.random_range(0..k)).collect();
    let max_k = graph.states().iter().copied().max().unwrap_or(0);
    let mut cond = vec![0.0; max_k];

    let mut sweep = |x: &mut Assignment, rng: &mut ChaCha8Rng| {
        for s in 0..graph.num_vertices() {
            let k = graph.num_states(s);
            let p = &mut cond[..k];
            p.copy_from_slice(theta.unary(graph, s));
            for nb in graph.neighbors(s) {
                let (u, v) = graph.edge(nb.edge);
                let table = theta.pairwise(graph, nb.edge);
                let kv = graph.num_states(v);
                for (xs, slot) in p.iter_mut().enumerate() {
                    *slot += if s == u {
                        table[xs * kv + x[v]]
                    } else {
                        table[x[u] * kv + xs]
                    };
                }
            }
            softmax_in_place(p, 1.0);
            let r: f64 = rng.random();
            let mut acc = 0.0;
            x[s] = k - 1;
            for (state, &ps) in p.iter().enumerate() {
                acc += ps;
                if r < acc {
                    x[s] = state;
                    break;
                }
            }
        }
    };

    for _ in 0..cfg.burn_in {
        sweep(&mut x, &mut rng);
    }
    let mut out = Vec::with_capacity(cfg.samples);
    while out.len() < cfg.samples {
        for _ in 0..cfg.thin {
            sweep(&mut x, &mut rng);
        }
        out.push(x.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_spec_round_trip() {
        for spec in ["grid:6x6", "ba:100:2"] {
            assert_eq!(spec.parse::<GraphKind>().unwrap().to_string(), spec);
        }
        for bad in ["grid:6", "ba:10", "tree:3x3", "grid:ax2"] {
            assert!(bad.parse::<GraphKind>().is_err(), "{bad}");
        }
    }

    #[test]
    fn templated_grounding() {
        let g = gen_grid(1, 2);
        let f = templated_features(&g, &[2.0, -1.0], &[1, 0]).unwrap();
        assert_eq!(f.num_params(), templated_dim(2));
        let shared = [0.5, 1.0, 0.0, 3.0, 1.0, 2.0, 3.0, 4.0];
        let theta = ground_potentials(&g, &shared, &f).unwrap();
        assert_eq!(theta.unary(&g, 0), &[1.0, 5.0]);
        assert_eq!(theta.unary(&g, 1), &[-0.5, 2.0]);
        assert_eq!(theta.pairwise(&g, 0), &[1.0, 2.0, 3.0, 4.0]);
        // M y counts covariate mass, label counts and edge configurations
        assert_eq!(f.project(f.labels()), vec![-1.0, 2.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(templated_features(&g, &[1.0], &[0, 0]).is_err());
    }

    #[test]
    fn templated_instances_are_reproducible() {
        let g = gen_grid(2, 2);
        let shared = [1.0, -1.0, 0.0, 0.0, 0.5, -0.5, -0.5, 0.5];
        let gibbs = GibbsConfig {
            burn_in: 50,
            seed: 3,
            ..GibbsConfig::default()
        };
        let a = gen_templated_instance(&g, &shared, &gibbs, 1).unwrap();
        assert_eq!(a, gen_templated_instance(&g, &shared, &gibbs, 1).unwrap());
        assert_ne!(
            a.features.matrix(),
            gen_templated_instance(&g, &shared, &gibbs, 2)
                .unwrap()
                .features
                .matrix()
        );
    }

    #[test]
    fn grid_counts() {
        let g = gen_grid(2, 2);
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 4));
        let g = gen_grid(1, 5);
        assert_eq!((g.num_vertices(), g.num_edges()), (5, 4));
        let g = gen_grid(3, 3);
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
        let g = gen_grid(7, 4);
        assert_eq!(g.num_edges(), 7 * 3 + 4 * 6);
        assert!(g.check_invariants().is_empty());
    }

    #[test]
    fn ba_seed_graph_only() {
        let g = gen_ba(4, 3, 1).unwrap();
        assert_eq!(g.num_edges(), 6);
        assert!((0..4).all(|s| g.degree(s) == 3));
    }

    #[test]
    fn ba_edge_count_and_min_degree() {
        let g = gen_ba(100, 2, 42).unwrap();
        assert_eq!(g.num_edges(), 3 + 2 * 97);
        assert!((0..100).all(|s| g.degree(s) >= 2));
        assert!(g.check_invariants().is_empty());
        assert_eq!(g, gen_ba(100, 2, 42).unwrap());
        assert!(gen_ba(3, 3, 0).is_err());
        assert!(gen_ba(3, 0, 0).is_err());
    }

    #[test]
    fn params_are_deterministic() {
        let g = gen_grid(3, 3);
        assert_eq!(gen_true_params(&g, 1.0, 9), gen_true_params(&g, 1.0, 9));
        assert_ne!(gen_true_params(&g, 1.0, 9), gen_true_params(&g, 1.0, 10));
    }

    #[test]
    fn gibbs_is_deterministic_per_seed() {
        let g = gen_grid(2, 3);
        let theta = gen_true_params(&g, 1.0, 3);
        let cfg = GibbsConfig {
            samples: 30,
            burn_in: 10,
            thin: 2,
            seed: 4,
        };
        let a = gibbs_sample(&g, &theta, &cfg).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a, gibbs_sample(&g, &theta, &cfg).unwrap());
        assert!(gibbs_sample(&g, &theta, &GibbsConfig { samples: 0, ..cfg }).is_err());
    }
}
