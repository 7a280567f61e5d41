use std::collections::HashSet;
use std::ops::Range;

use crate::error::{Error, Result};

/// One entry of a vertex's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: usize,
    pub edge: usize,
}

/// Bijection between structured unary/pairwise tables and flat vectors.
///
/// The flat order is fixed: every unary table in vertex order, then every
/// pairwise table in edge-list order, each pairwise table row-major with the
/// smaller endpoint indexing rows. Parameters, beliefs, sufficient statistics
/// and block scatter maps all use this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    unary_offsets: Vec<usize>,
    pair_offsets: Vec<usize>,
    len: usize,
}

impl Layout {
    /// Total flat length `d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn unary_offset(&self, vertex: usize) -> usize {
        self.unary_offsets[vertex]
    }

    pub fn pair_offset(&self, edge: usize) -> usize {
        self.pair_offsets[edge]
    }

    /// Offset where the pairwise section starts.
    pub fn pairwise_start(&self) -> usize {
        self.pair_offsets.first().copied().unwrap_or(self.len)
    }
}

/// Undirected pairwise graph with per-vertex state counts.
///
/// Edges are stored canonically as `(u, v)` with `u < v`; directed messages are
/// addressed separately (see [`GraphTopology::message_id`]).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTopology {
    states: Vec<usize>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Neighbor>>,
    layout: Layout,
    message_offsets: Vec<usize>,
    sweep_order: Vec<usize>,
}

impl GraphTopology {
    /// Builds a graph, canonicalising each edge to `(min, max)`.
    ///
    /// Rejects empty graphs, state counts below two, self-loops, duplicate
    /// edges and out-of-range endpoints.
    pub fn new(states: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if let Some(s) = states.iter().position(|&k| k < 2) {
            return Err(Error::InvalidGraph(format!(
                "vertex {s} has {} states, need at least 2",
                states[s]
            )));
        }
        let mut seen = HashSet::new();
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!("duplicate edge {e:?}")));
            }
            canonical.push(e);
        }

        let mut adjacency = vec![Vec::new(); n];
        for (idx, &(u, v)) in canonical.iter().enumerate() {
            adjacency[u].push(Neighbor { vertex: v, edge: idx });
            adjacency[v].push(Neighbor { vertex: u, edge: idx });
        }

        let mut offset = 0;
        let unary_offsets = states
            .iter()
            .map(|&k| {
                let o = offset;
                offset += k;
                o
            })
            .collect();
        let pair_offsets = canonical
            .iter()
            .map(|&(u, v)| {
                let o = offset;
                offset += states[u] * states[v];
                o
            })
            .collect();
        let layout = Layout {
            unary_offsets,
            pair_offsets,
            len: offset,
        };

        let mut message_offsets = Vec::with_capacity(2 * canonical.len() + 1);
        let mut m = 0;
        for &(u, v) in &canonical {
            message_offsets.push(m);
            m += states[v];
            message_offsets.push(m);
            m += states[u];
        }
        message_offsets.push(m);

        let mut sweep_order: Vec<usize> = (0..canonical.len()).collect();
        sweep_order.sort_by_key(|&e| canonical[e]);

        Ok(Self {
            states,
            edges: canonical,
            adjacency,
            layout,
            message_offsets,
            sweep_order,
        })
    }

    /// Graph with `n` vertices of `k` states each.
    pub fn uniform(n: usize, k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(vec![k; n], edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn num_states(&self, vertex: usize) -> usize {
        self.states[vertex]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn neighbors(&self, vertex: usize) -> &[Neighbor] {
        &self.adjacency[vertex]
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.adjacency[vertex].len()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Flat length `d` of the potential/belief vectors.
    pub fn dim(&self) -> usize {
        self.layout.len
    }

    pub fn unary_range(&self, vertex: usize) -> Range<usize> {
        let o = self.layout.unary_offsets[vertex];
        o..o + self.states[vertex]
    }

    pub fn pair_range(&self, e: usize) -> Range<usize> {
        let (u, v) = self.edges[e];
        let o = self.layout.pair_offsets[e];
        o..o + self.states[u] * self.states[v]
    }

    /// Directed message id: `2e` carries `u → v`, `2e + 1` carries `v → u`
    /// for canonical edge `e = (u, v)`.
    pub fn message_id(&self, e: usize, toward_larger: bool) -> usize {
        if toward_larger {
            2 * e
        } else {
            2 * e + 1
        }
    }

    /// Id of the message arriving at `vertex` along edge `e`.
    pub fn incoming_message(&self, vertex: usize, e: usize) -> usize {
        let (_, v) = self.edges[e];
        self.message_id(e, vertex == v)
    }

    pub fn message_range(&self, id: usize) -> Range<usize> {
        self.message_offsets[id]..self.message_offsets[id + 1]
    }

    /// Total length of the flat message storage.
    pub fn message_len(&self) -> usize {
        *self.message_offsets.last().expect("offsets end with a sentinel")
    }

    /// Edge indices sorted by `(u, v)`; the deterministic BP sweep order.
    pub fn sweep_order(&self) -> &[usize] {
        &self.sweep_order
    }

    /// Number of joint assignments `Π k_s`, as a float to avoid overflow.
    pub fn joint_state_count(&self) -> f64 {
        self.states.iter().map(|&k| k as f64).product()
    }

    /// Checks every structural invariant; returns a list of violations.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.num_vertices();
        let mut seen = HashSet::new();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if u >= v {
                out.push(format!("edge {e} is not canonical: ({u},{v})"));
            }
            if v >= n {
                out.push(format!("edge {e} endpoint out of range"));
            }
            if !seen.insert((u, v)) {
                out.push(format!("edge {e} duplicates ({u},{v})"));
            }
        }
        for (s, nbrs) in self.adjacency.iter().enumerate() {
            for nb in nbrs {
                let (u, v) = self.edges[nb.edge];
                let ok = (u == s && v == nb.vertex) || (v == s && u == nb.vertex);
                if !ok {
                    out.push(format!("adjacency of {s} inconsistent with edge {}", nb.edge));
                }
                if !self.adjacency[nb.vertex].iter().any(|m| m.vertex == s) {
                    out.push(format!("adjacency not symmetric between {s} and {}", nb.vertex));
                }
            }
        }
        let listed: usize = self.adjacency.iter().map(Vec::len).sum();
        if listed != 2 * self.edges.len() {
            out.push("adjacency size does not match edge list".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_lengths() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        assert_eq!(g.dim(), 8);
        let g = GraphTopology::uniform(1, 4, []).unwrap();
        assert_eq!(g.dim(), 4);
        let g = GraphTopology::uniform(3, 3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.dim(), 27);
    }

    #[test]
    fn layout_order_is_vertices_then_edges() {
        let g = GraphTopology::new(vec![2, 3, 2], [(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.unary_range(0), 0..2);
        assert_eq!(g.unary_range(1), 2..5);
        assert_eq!(g.unary_range(2), 5..7);
        // edge 0 canonicalised to (1,2): 3x2 table
        assert_eq!(g.edge(0), (1, 2));
        assert_eq!(g.pair_range(0), 7..13);
        assert_eq!(g.pair_range(1), 13..19);
        assert_eq!(g.sweep_order(), &[1, 0]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(GraphTopology::uniform(3, 2, [(0, 0)]).is_err());
        assert!(GraphTopology::uniform(3, 2, [(0, 1), (1, 0)]).is_err());
        assert!(GraphTopology::uniform(3, 2, [(0, 3)]).is_err());
        assert!(GraphTopology::new(vec![2, 1], []).is_err());
        assert!(GraphTopology::new(vec![], []).is_err());
    }

    #[test]
    fn message_addressing() {
        let g = GraphTopology::new(vec![2, 3], [(0, 1)]).unwrap();
        assert_eq!(g.message_range(0).len(), 3); // 0 -> 1, indexed by x_1
        assert_eq!(g.message_range(1).len(), 2); // 1 -> 0
        assert_eq!(g.incoming_message(1, 0), 0);
        assert_eq!(g.incoming_message(0, 0), 1);
        assert_eq!(g.message_len(), 5);
        assert!(g.check_invariants().is_empty());
    }
}
