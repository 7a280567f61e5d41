//! Block decompositions `F_i = (V_i, E_i)` of a graph.
//!
//! Vertex blocks are disjoint and cover `V`. Each edge block is
//! `E_i = {(u,v) ∈ E : u ∈ V_i or v ∈ V_i}`, so an edge whose endpoints lie in
//! different blocks belongs to both. Every block carries a precomputed scatter
//! map: the flat indices (in the potential/belief layout) of its unary tables
//! followed by the pairwise tables of its edges.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::GraphTopology;

/// An edge of a block, with which endpoints belong to the block's vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEdge {
    pub edge: usize,
    pub u_in: bool,
    pub v_in: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    id: usize,
    vertices: Vec<usize>,
    edges: Vec<BlockEdge>,
    flat_indices: Vec<usize>,
}

impl Block {
    fn assemble(graph: &GraphTopology, id: usize, mut vertices: Vec<usize>, mut edges: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        edges.sort_unstable_by_key(|&e| graph.edge(e));
        edges.dedup();
        let contains = |s: usize| vertices.binary_search(&s).is_ok();
        let edges: Vec<BlockEdge> = edges
            .into_iter()
            .map(|e| {
                let (u, v) = graph.edge(e);
                BlockEdge {
                    edge: e,
                    u_in: contains(u),
                    v_in: contains(v),
                }
            })
            .collect();
        let mut flat_indices = Vec::new();
        for &s in vertices.iter().filter(|&&s| s < graph.num_vertices()) {
            flat_indices.extend(graph.unary_range(s));
        }
        for be in &edges {
            flat_indices.extend(graph.pair_range(be.edge));
        }
        Self {
            id,
            vertices,
            edges,
            flat_indices,
        }
    }

    /// The whole graph as a single block.
    pub fn whole(graph: &GraphTopology) -> Self {
        Self::assemble(
            graph,
            0,
            (0..graph.num_vertices()).collect(),
            graph.sweep_order().to_vec(),
        )
    }

    /// Block `V_i = vertices` with `E_i` computed by the incidence rule.
    pub fn from_vertices(graph: &GraphTopology, id: usize, vertices: Vec<usize>) -> Result<Self> {
        if let Some(&s) = vertices.iter().find(|&&s| s >= graph.num_vertices()) {
            return Err(Error::InvalidPartition(format!(
                "block {id} references vertex {s} outside the graph"
            )));
        }
        let edges = incident_edges(graph, &vertices);
        Ok(Self::assemble(graph, id, vertices, edges))
    }

    pub fn id(&self) -> usize {
        self.id
    }

    /// `V_i`, sorted.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// `E_i` in sweep order.
    pub fn edges(&self) -> &[BlockEdge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|be| be.edge)
    }

    /// Flat indices realizing the projection `U_{F_i}`.
    pub fn flat_indices(&self) -> &[usize] {
        &self.flat_indices
    }

    /// Directed messages updated per sweep: `2 |E_i|`.
    pub fn directed_messages(&self) -> usize {
        2 * self.edges.len()
    }
}

fn incident_edges(graph: &GraphTopology, vertices: &[usize]) -> Vec<usize> {
    let mut edges: Vec<usize> = vertices
        .iter()
        .flat_map(|&s| graph.neighbors(s).iter().map(|nb| nb.edge))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Contiguous split of `n` items into `parts` near-equal runs, the first
/// `n mod parts` one larger.
fn split_sizes(n: usize, parts: usize) -> Vec<usize> {
    let base = n / parts;
    let extra = n % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

fn ranges(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    split_sizes(n, parts)
        .into_iter()
        .map(|len| {
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// A violated partition invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    VertexOutOfRange { block: usize, vertex: usize },
    VertexInMultipleBlocks { vertex: usize, first: usize, second: usize },
    VertexUncovered { vertex: usize },
    EdgeMissing { block: usize, edge: usize },
    EdgeNotIncident { block: usize, edge: usize },
    EdgeUncovered { edge: usize },
    ScatterMismatch { block: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VertexOutOfRange { block, vertex } => {
                write!(f, "block {block}: vertex {vertex} out of range")
            }
            Self::VertexInMultipleBlocks { vertex, first, second } => {
                write!(f, "vertex {vertex} appears in blocks {first} and {second}")
            }
            Self::VertexUncovered { vertex } => write!(f, "vertex {vertex} is in no block"),
            Self::EdgeMissing { block, edge } => {
                write!(f, "block {block}: incident edge {edge} missing from E_i")
            }
            Self::EdgeNotIncident { block, edge } => {
                write!(f, "block {block}: edge {edge} is not incident to V_i")
            }
            Self::EdgeUncovered { edge } => write!(f, "edge {edge} is in no edge block"),
            Self::ScatterMismatch { block } => {
                write!(f, "block {block}: scatter map does not match (V_i, E_i)")
            }
        }
    }
}

/// `V_1..V_D` with incident edge sets and scatter maps.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Block>,
}

impl BlockPartition {
    /// Builds `E_i` from the incidence rule and checks the result.
    pub fn from_vertex_blocks(graph: &GraphTopology, vertex_blocks: Vec<Vec<usize>>) -> Result<Self> {
        if vertex_blocks.is_empty() {
            return Err(Error::InvalidPartition("partition has no blocks".into()));
        }
        let blocks = vertex_blocks
            .into_iter()
            .enumerate()
            .map(|(id, vs)| Block::from_vertices(graph, id, vs))
            .collect::<Result<Vec<_>>>()?;
        let partition = Self { blocks };
        let violations = partition.validate(graph);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidPartition(v.to_string()));
        }
        Ok(partition)
    }

    /// Takes `V_i` and `E_i` verbatim without checking anything; pair with
    /// [`BlockPartition::validate`].
    pub fn from_parts_unchecked(
        graph: &GraphTopology,
        vertex_blocks: Vec<Vec<usize>>,
        edge_blocks: Vec<Vec<usize>>,
    ) -> Self {
        let blocks = vertex_blocks
            .into_iter()
            .zip(edge_blocks)
            .enumerate()
            .map(|(id, (vs, es))| {
                let es = es.into_iter().filter(|&e| e < graph.num_edges()).collect();
                Block::assemble(graph, id, vs, es)
            })
            .collect();
        Self { blocks }
    }

    /// Tiles a `rows × cols` grid (vertex `r·cols + c`) into
    /// `block_rows × block_cols` rectangles, numbered row-major. When the
    /// grid does not divide evenly the first tiles are one larger.
    pub fn grid(graph: &GraphTopology, rows: usize, cols: usize, block_rows: usize, block_cols: usize) -> Result<Self> {
        if block_rows == 0 || block_cols == 0 {
            return Err(Error::InvalidPartition("block counts must be positive".into()));
        }
        if block_rows > rows || block_cols > cols {
            return Err(Error::InvalidPartition(format!(
                "{block_rows}x{block_cols} tiles do not fit a {rows}x{cols} grid"
            )));
        }
        if graph.num_vertices() != rows * cols {
            return Err(Error::InvalidPartition(format!(
                "graph has {} vertices, not a {rows}x{cols} grid",
                graph.num_vertices()
            )));
        }
        let row_ranges = ranges(rows, block_rows);
        let col_ranges = ranges(cols, block_cols);
        let mut vertex_blocks = Vec::with_capacity(block_rows * block_cols);
        for rr in &row_ranges {
            for cr in &col_ranges {
                let vs = rr.clone().flat_map(|r| cr.clone().map(move |c| r * cols + c)).collect();
                vertex_blocks.push(vs);
            }
        }
        Self::from_vertex_blocks(graph, vertex_blocks)
    }

    /// `D` contiguous index ranges of near-equal size, the first `n mod D`
    /// one larger.
    pub fn index(graph: &GraphTopology, d: usize) -> Result<Self> {
        let n = graph.num_vertices();
        if d == 0 || d > n {
            return Err(Error::InvalidPartition(format!("block count {d} outside 1..={n}")));
        }
        let vertex_blocks = ranges(n, d).into_iter().map(|r| r.collect()).collect();
        Self::from_vertex_blocks(graph, vertex_blocks)
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &Block {
        &self.blocks[id]
    }

    /// Checks disjointness, coverage, the incidence rule for every `E_i`, and
    /// the scatter maps. An empty result means the partition is valid.
    pub fn validate(&self, graph: &GraphTopology) -> Vec<Violation> {
        let n = graph.num_vertices();
        let mut out = Vec::new();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for block in &self.blocks {
            for &s in &block.vertices {
                if s >= n {
                    out.push(Violation::VertexOutOfRange {
                        block: block.id,
                        vertex: s,
                    });
                    continue;
                }
                match owner[s] {
                    Some(first) => out.push(Violation::VertexInMultipleBlocks {
                        vertex: s,
                        first,
                        second: block.id,
                    }),
                    None => owner[s] = Some(block.id),
                }
            }
        }
        for (s, o) in owner.iter().enumerate() {
            if o.is_none() {
                out.push(Violation::VertexUncovered { vertex: s });
            }
        }
        let mut covered = vec![false; graph.num_edges()];
        for block in &self.blocks {
            let in_range: Vec<usize> = block.vertices.iter().copied().filter(|&s| s < n).collect();
            let expected = incident_edges(graph, &in_range);
            let mut actual: Vec<usize> = block.edge_ids().collect();
            actual.sort_unstable();
            for &e in &actual {
                covered[e] = true;
                if expected.binary_search(&e).is_err() {
                    out.push(Violation::EdgeNotIncident {
                        block: block.id,
                        edge: e,
                    });
                }
            }
            for &e in &expected {
                if actual.binary_search(&e).is_err() {
                    out.push(Violation::EdgeMissing {
                        block: block.id,
                        edge: e,
                    });
                }
            }
            let rebuilt = Block::assemble(graph, block.id, block.vertices.clone(), actual);
            if rebuilt.flat_indices != block.flat_indices || rebuilt.edges != block.edges {
                out.push(Violation::ScatterMismatch { block: block.id });
            }
        }
        for (e, c) in covered.iter().enumerate() {
            if !c {
                out.push(Violation::EdgeUncovered { edge: e });
            }
        }
        out
    }
}

/// Values of `full` at the block's flat indices.
pub fn gather(full: &[f64], block: &Block) -> Vec<f64> {
    block.flat_indices.iter().map(|&i| full[i]).collect()
}

/// Overwrites the block's coordinates of `full` with `sub`, leaving every
/// other entry untouched. Equivalent to `full + U_F (sub − full^(F))`.
pub fn scatter_update(full: &mut [f64], block: &Block, sub: &[f64]) -> Result<()> {
    if sub.len() != block.flat_indices.len() {
        return Err(Error::Shape(format!(
            "block {} has {} coordinates, got {}",
            block.id,
            block.flat_indices.len(),
            sub.len()
        )));
    }
    if let Some(&i) = block.flat_indices.iter().find(|&&i| i >= full.len()) {
        return Err(Error::Shape(format!(
            "block index {i} out of bounds for vector of length {}",
            full.len()
        )));
    }
    for (&i, &x) in block.flat_indices.iter().zip(sub) {
        full[i] = x;
    }
    Ok(())
}

/// Partition grammar: `grid:RxC` (tiles of a grid graph), `index:D`
/// (contiguous index ranges), or `whole` (a single block).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionSpec {
    Grid { block_rows: usize, block_cols: usize },
    Index(usize),
    Whole,
}

impl FromStr for PartitionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid partition spec `{s}` (expected grid:RxC, index:D or whole)"
            ))
        };
        if s == "whole" {
            return Ok(Self::Whole);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "grid" => {
                let (r, c) = arg.split_once('x').ok_or_else(bad)?;
                Ok(Self::Grid {
                    block_rows: r.parse().map_err(|_| bad())?,
                    block_cols: c.parse().map_err(|_| bad())?,
                })
            }
            "index" => Ok(Self::Index(arg.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Grid { block_rows, block_cols } => write!(f, "grid:{block_rows}x{block_cols}"),
            Self::Index(d) => write!(f, "index:{d}"),
            Self::Whole => f.write_str("whole"),
        }
    }
}

impl PartitionSpec {
    /// `grid_dims` is required for `grid:` specs.
    pub fn build(&self, graph: &GraphTopology, grid_dims: Option<(usize, usize)>) -> Result<BlockPartition> {
        match *self {
            Self::Grid { block_rows, block_cols } => {
                let (rows, cols) =
                    grid_dims.ok_or_else(|| Error::Config(format!("partition `{self}` needs a grid graph")))?;
                BlockPartition::grid(graph, rows, cols, block_rows, block_cols)
            }
            Self::Index(d) => BlockPartition::index(graph, d),
            Self::Whole => BlockPartition::index(graph, 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gen_grid;

    #[test]
    fn grid_2x2_tiles() {
        let g = gen_grid(4, 4);
        let p = BlockPartition::grid(&g, 4, 4, 2, 2).unwrap();
        assert_eq!(p.num_blocks(), 4);
        assert!(p.blocks().iter().all(|b| b.vertices().len() == 4));
        assert_eq!(p.block(0).vertices(), &[0, 1, 4, 5]);
        assert_eq!(p.block(0).edges().len(), 8);
        let internal = p.block(0).edges().iter().filter(|be| be.u_in && be.v_in).count();
        assert_eq!(internal, 4);
        assert!(p.validate(&g).is_empty());
    }

    #[test]
    fn unit_tiles_hold_incident_edges() {
        let g = gen_grid(3, 4);
        let p = BlockPartition::grid(&g, 3, 4, 3, 4).unwrap();
        assert_eq!(p.num_blocks(), 12);
        for b in p.blocks() {
            let s = b.vertices()[0];
            assert_eq!(b.edges().len(), g.degree(s));
        }
    }

    #[test]
    fn grid_remainders_go_to_first_tiles() {
        let g = gen_grid(5, 3);
        let p = BlockPartition::grid(&g, 5, 3, 2, 1).unwrap();
        assert_eq!(p.block(0).vertices().len(), 9);
        assert_eq!(p.block(1).vertices().len(), 6);
        assert!(BlockPartition::grid(&g, 5, 3, 0, 1).is_err());
        assert!(BlockPartition::grid(&g, 5, 3, 6, 1).is_err());
    }

    #[test]
    fn index_partition_sizes() {
        let g = GraphTopology::uniform(10, 2, (0..9).map(|i| (i, i + 1))).unwrap();
        let p = BlockPartition::index(&g, 2).unwrap();
        assert_eq!(p.block(0).vertices(), &[0, 1, 2, 3, 4]);
        assert_eq!(p.block(1).vertices(), &[5, 6, 7, 8, 9]);
        let p = BlockPartition::index(&g, 3).unwrap();
        let sizes: Vec<usize> = p.blocks().iter().map(|b| b.vertices().len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        let p = BlockPartition::index(&g, 1).unwrap();
        assert_eq!(p.block(0).edges().len(), g.num_edges());
        assert!(BlockPartition::index(&g, 0).is_err());
        assert!(BlockPartition::index(&g, 11).is_err());
    }

    #[test]
    fn seeded_faults_are_reported() {
        let g = gen_grid(2, 2);
        let p = BlockPartition::from_parts_unchecked(
            &g,
            vec![vec![0, 1], vec![1, 2, 3]],
            vec![(0..4).collect(), (0..4).collect()],
        );
        assert!(p
            .validate(&g)
            .iter()
            .any(|v| matches!(v, Violation::VertexInMultipleBlocks { vertex: 1, .. })));

        let good = BlockPartition::index(&g, 2).unwrap();
        let mut edge_blocks: Vec<Vec<usize>> = good.blocks().iter().map(|b| b.edge_ids().collect()).collect();
        let dropped = edge_blocks[0].pop().unwrap();
        let vertex_blocks = good.blocks().iter().map(|b| b.vertices().to_vec()).collect();
        let p = BlockPartition::from_parts_unchecked(&g, vertex_blocks, edge_blocks);
        assert!(p.validate(&g).contains(&Violation::EdgeMissing {
            block: 0,
            edge: dropped
        }));
    }

    #[test]
    fn scatter_semantics() {
        let g = gen_grid(2, 3);
        let p = BlockPartition::index(&g, 2).unwrap();
        let full: Vec<f64> = (0..g.dim()).map(|i| i as f64).collect();

        let mut same = full.clone();
        scatter_update(&mut same, p.block(0), &gather(&full, p.block(0))).unwrap();
        assert_eq!(same, full);

        let whole = Block::whole(&g);
        let sub: Vec<f64> = (0..g.dim()).map(|i| -(i as f64)).collect();
        let mut out = full.clone();
        scatter_update(&mut out, &whole, &sub).unwrap();
        assert_eq!(out, sub);

        assert!(scatter_update(&mut out, p.block(0), &[1.0]).is_err());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(
            "grid:5x5".parse::<PartitionSpec>().unwrap(),
            PartitionSpec::Grid {
                block_rows: 5,
                block_cols: 5
            }
        );
        assert_eq!("index:20".parse::<PartitionSpec>().unwrap(), PartitionSpec::Index(20));
        assert_eq!("whole".parse::<PartitionSpec>().unwrap(), PartitionSpec::Whole);
        for bad in ["grid:5", "index:x", "tiles:3", ""] {
            assert!(bad.parse::<PartitionSpec>().is_err(), "{bad}");
        }
        assert_eq!(
            PartitionSpec::Grid {
                block_rows: 2,
                block_cols: 3
            }
            .to_string(),
            "grid:2x3"
        );
    }
}
