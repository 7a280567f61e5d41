use crate::error::{Error, Result};
use crate::model::{GraphTopology, PotentialVector};

/// One full assignment `x ∈ X`, one state per vertex.
pub type Assignment = Vec<usize>;

fn check_assignment(graph: &GraphTopology, record: usize, x: &[usize]) -> Result<()> {
    if x.len() != graph.num_vertices() {
        return Err(Error::Shape(format!(
            "record {record} has {} entries, graph has {} vertices",
            x.len(),
            graph.num_vertices()
        )));
    }
    for (vertex, (&state, &states)) in x.iter().zip(graph.states()).enumerate() {
        if state >= states {
            return Err(Error::AssignmentOutOfRange {
                record,
                vertex,
                state,
                states,
            });
        }
    }
    Ok(())
}

/// Adds `weight` times the one-hot sufficient statistics of `x` into `out`.
fn accumulate_indicators(graph: &GraphTopology, x: &[usize], weight: f64, out: &mut [f64]) {
    for (s, &xs) in x.iter().enumerate() {
        out[graph.layout().unary_offset(s) + xs] += weight;
    }
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let kv = graph.num_states(v);
        out[graph.layout().pair_offset(e) + x[u] * kv + x[v]] += weight;
    }
}

/// One-hot sufficient-statistics vector of a single assignment: the
/// indicator of every vertex state and every edge state pair.
pub fn sufficient_statistics(graph: &GraphTopology, x: &[usize]) -> Result<Vec<f64>> {
    check_assignment(graph, 0, x)?;
    let mut out = vec![0.0; graph.dim()];
    accumulate_indicators(graph, x, 1.0, &mut out);
    Ok(out)
}

/// Average sufficient statistics `w̄ = (1/N) Σ_n w_n` of a sample set.
pub fn empirical_statistics(graph: &GraphTopology, samples: &[Assignment]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let weight = 1.0 / samples.len() as f64;
    let mut out = vec![0.0; graph.dim()];
    for (record, x) in samples.iter().enumerate() {
        check_assignment(graph, record, x)?;
        accumulate_indicators(graph, x, weight, &mut out);
    }
    Ok(out)
}

/// Full-assignment training data for an MRF, with cached `w̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfDataset {
    samples: Vec<Assignment>,
    statistics: Vec<f64>,
}

impl MrfDataset {
    pub fn new(graph: &GraphTopology, samples: Vec<Assignment>) -> Result<Self> {
        let statistics = empirical_statistics(graph, &samples)?;
        Ok(Self { samples, statistics })
    }

    pub fn samples(&self) -> &[Assignment] {
        &self.samples
    }

    /// `w̄` in the flat potential layout.
    pub fn statistics(&self) -> &[f64] {
        &self.statistics
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Dense feature matrix `M` (`K × d`, row-major) and label vector `y`.
///
/// The grounded potential vector of a shared parameter `θ̃ ∈ R^K` is
/// `θ = θ̃ᵀ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    num_params: usize,
    dim: usize,
    matrix: Vec<f64>,
    labels: Vec<f64>,
}

impl FeatureModel {
    /// Validates dimensions, finiteness and that `y` is the one-hot encoding
    /// of some full assignment on `graph`.
    pub fn new(graph: &GraphTopology, num_params: usize, matrix: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        let dim = graph.dim();
        if num_params == 0 {
            return Err(Error::Shape("feature model needs K ≥ 1".into()));
        }
        if matrix.len() != num_params * dim {
            return Err(Error::Shape(format!(
                "feature matrix must be {num_params}×{dim}, got {} entries",
                matrix.len()
            )));
        }
        if labels.len() != dim {
            return Err(Error::Shape(format!(
                "label vector must have {dim} entries, got {}",
                labels.len()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        let assignment = decode_labels(graph, &labels)?;
        if sufficient_statistics(graph, &assignment)? != labels {
            return Err(Error::Shape(
                "label vector is not consistent with a single assignment".into(),
            ));
        }
        Ok(Self {
            num_params,
            dim,
            matrix,
            labels,
        })
    }

    /// `M = I` (so `K = d`) with labels from `assignment`.
    pub fn identity(graph: &GraphTopology, assignment: &[usize]) -> Result<Self> {
        let d = graph.dim();
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self::new(graph, d, matrix, sufficient_statistics(graph, assignment)?)
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row `k` of `M`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.matrix[k * self.dim..(k + 1) * self.dim]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// `M v` for a flat vector `v` of length `d`; result has length `K`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (0..self.num_params).map(|k| crate::math::dot(self.row(k), v)).collect()
    }

    /// `out += scale · Σ_j M[:, j] · delta_j` over the given flat indices.
    pub fn project_sparse_into(&self, indices: &[usize], delta: &[f64], scale: f64, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let row = self.row(k);
            let acc: f64 = indices.iter().zip(delta).map(|(&j, &dj)| row[j] * dj).sum();
            *slot += scale * acc;
        }
    }

    /// Grounded value of the flat potential entry `j`: `Σ_k θ̃_k M[k, j]`.
    pub fn ground_entry(&self, shared: &[f64], j: usize) -> f64 {
        shared
            .iter()
            .enumerate()
            .map(|(k, &t)| t * self.matrix[k * self.dim + j])
            .sum()
    }
}

/// Recovers the assignment encoded by a one-hot label vector.
pub fn decode_labels(graph: &GraphTopology, labels: &[f64]) -> Result<Assignment> {
    (0..graph.num_vertices())
        .map(|s| {
            let slice = &labels[graph.unary_range(s)];
            let ones: Vec<usize> = slice
                .iter()
                .enumerate()
                .filter(|(_, &y)| y == 1.0)
                .map(|(i, _)| i)
                .collect();
            let valid = ones.len() == 1 && slice.iter().all(|&y| y == 0.0 || y == 1.0);
            if valid {
                Ok(ones[0])
            } else {
                Err(Error::Shape(format!("labels of vertex {s} are not a one-hot vector")))
            }
        })
        .collect()
}

/// Grounded potential vector `θ = θ̃ᵀ M` in the graph's layout.
pub fn ground_potentials(graph: &GraphTopology, shared: &[f64], features: &FeatureModel) -> Result<PotentialVector> {
    if shared.len() != features.num_params() {
        return Err(Error::Shape(format!(
            "shared parameter has length {}, feature model expects {}",
            shared.len(),
            features.num_params()
        )));
    }
    if features.dim() != graph.dim() {
        return Err(Error::Shape(format!(
            "feature model grounds {} entries, graph layout has {}",
            features.dim(),
            graph.dim()
        )));
    }
    let mut theta = vec![0.0; graph.dim()];
    for (k, &t) in shared.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        for (slot, &m) in theta.iter_mut().zip(features.row(k)) {
            *slot += t * m;
        }
    }
    PotentialVector::from_flat(graph, theta)
}

/// One conditional training instance: a graph with its feature model.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfInstance {
    pub graph: GraphTopology,
    pub features: FeatureModel,
}

/// Conditional training data with cached `w̄ = (1/N) Σ_i M_i y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfDataset {
    instances: Vec<CrfInstance>,
    statistics: Vec<f64>,
}

impl CrfDataset {
    pub fn new(instances: Vec<CrfInstance>) -> Result<Self> {
        let first = instances.first().ok_or(Error::EmptyDataset)?;
        let k = first.features.num_params();
        let mut statistics = vec![0.0; k];
        let weight = 1.0 / instances.len() as f64;
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.num_params() != k {
                return Err(Error::Shape(format!(
                    "instance {i} has K = {}, expected {k}",
                    inst.features.num_params()
                )));
            }
            if inst.features.dim() != inst.graph.dim() {
                return Err(Error::Shape(format!(
                    "instance {i}: feature dimension {} does not match graph layout {}",
                    inst.features.dim(),
                    inst.graph.dim()
                )));
            }
            let my = inst.features.project(inst.features.labels());
            for (acc, v) in statistics.iter_mut().zip(my) {
                *acc += weight * v;
            }
        }
        Ok(Self { instances, statistics })
    }

    pub fn instances(&self) -> &[CrfInstance] {
        &self.instances
    }

    pub fn num_params(&self) -> usize {
        self.statistics.len()
    }

    /// `w̄` of length `K`.
    pub fn statistics(&self) -> &[f64] {
        &self.statistics
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_average() {
        let g = GraphTopology::uniform(1, 2, []).unwrap();
        let w = empirical_statistics(&g, &[vec![0], vec![1]]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn single_sample_is_its_one_hot() {
        let g = GraphTopology::uniform(3, 2, [(0, 1), (1, 2)]).unwrap();
        let x = vec![1, 0, 1];
        assert_eq!(
            empirical_statistics(&g, std::slice::from_ref(&x)).unwrap(),
            sufficient_statistics(&g, &x).unwrap()
        );
    }

    #[test]
    fn two_node_hand_count() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        let w = empirical_statistics(&g, &[vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(w, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn empty_and_out_of_range() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        assert!(matches!(empirical_statistics(&g, &[]), Err(Error::EmptyDataset)));
        assert!(matches!(
            empirical_statistics(&g, &[vec![0, 2]]),
            Err(Error::AssignmentOutOfRange {
                vertex: 1,
                state: 2,
                ..
            })
        ));
    }

    #[test]
    fn grounding_is_linear() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        let fm = FeatureModel::identity(&g, &[0, 1]).unwrap();
        let shared: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert_eq!(ground_potentials(&g, &shared, &fm).unwrap().as_slice(), &shared[..]);
        let zero = ground_potentials(&g, &[0.0; 8], &fm).unwrap();
        assert!(zero.as_slice().iter().all(|&x| x == 0.0));

        let labels = sufficient_statistics(&g, &[0, 0]).unwrap();
        let ones = FeatureModel::new(&g, 1, vec![1.0; 8], labels).unwrap();
        let theta = ground_potentials(&g, &[2.0], &ones).unwrap();
        assert!(theta.as_slice().iter().all(|&x| x == 2.0));
        assert!(ground_potentials(&g, &[1.0, 2.0], &ones).is_err());
    }

    #[test]
    fn labels_must_be_consistent() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        // unary says (0,0) but pairwise slice says (1,1)
        let bad = vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!(FeatureModel::new(&g, 1, vec![0.0; 8], bad).is_err());
    }

    #[test]
    fn crf_statistics_average_projected_labels() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        let a = CrfInstance {
            graph: g.clone(),
            features: FeatureModel::identity(&g, &[0, 0]).unwrap(),
        };
        let b = CrfInstance {
            graph: g.clone(),
            features: FeatureModel::identity(&g, &[0, 1]).unwrap(),
        };
        let data = CrfDataset::new(vec![a, b]).unwrap();
        assert_eq!(data.statistics(), &[1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0]);
    }
}
