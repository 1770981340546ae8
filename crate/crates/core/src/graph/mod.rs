//! Directed network representation shared by every analysis in the crate.
//!
//! Nodes are dense indices `0..n`. Each graph keeps the external identifier
//! of every node so results can be reported in the caller's numbering.

mod generate;
mod io;
mod matching;

pub use generate::{generate_ba, generate_ba_sized, generate_er};
pub use io::{parse_edge_list, GraphJson};
pub use matching::{driver_count, maximum_matching};

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge {src}->{dst} has zero weight")]
    ZeroWeight { src: u64, dst: u64 },
    #[error("edge {src}->{dst} has non-finite weight")]
    NonFiniteWeight { src: u64, dst: u64 },
    #[error("edge endpoint {index} out of range for {n} nodes")]
    EndpointOutOfRange { index: usize, n: usize },
    #[error("duplicate edge {src}->{dst}")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("id map has {got} entries, expected {expected}")]
    IdMapLength { got: usize, expected: usize },
    #[error("duplicate external id {0}")]
    DuplicateExternalId(u64),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// A weighted directed edge between two internal node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Self { src, dst, weight }
    }

    pub fn unit(src: usize, dst: usize) -> Self {
        Self::new(src, dst, 1.0)
    }
}

/// Directed graph with nonzero edge weights and no parallel edges.
///
/// Edges are stored sorted by `(src, dst)`, so two graphs built from the same
/// edge set compare equal regardless of insertion order. Self-loops are legal.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<Edge>,
    /// `out_offsets[v]..out_offsets[v + 1]` indexes the out-edges of `v`.
    out_offsets: Vec<usize>,
    external_ids: Vec<u64>,
}

impl DirectedGraph {
    /// Builds a graph over `n` nodes whose external ids equal the internal ones.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        Self::with_ids(n, edges, (0..n as u64).collect())
    }

    /// Unit-weight convenience constructor.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, pairs.iter().map(|&(s, d)| Edge::unit(s, d)))
    }

    pub fn with_ids(
        n: usize,
        edges: impl IntoIterator<Item = Edge>,
        external_ids: Vec<u64>,
    ) -> Result<Self, GraphError> {
        if external_ids.len() != n {
            return Err(GraphError::IdMapLength {
                got: external_ids.len(),
                expected: n,
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        for &id in &external_ids {
            if !seen.insert(id) {
                return Err(GraphError::DuplicateExternalId(id));
            }
        }

        let mut edges: Vec<Edge> = edges.into_iter().collect();
        for e in &edges {
            for index in [e.src, e.dst] {
                if index >= n {
                    return Err(GraphError::EndpointOutOfRange { index, n });
                }
            }
            let (src, dst) = (external_ids[e.src], external_ids[e.dst]);
            if !e.weight.is_finite() {
                return Err(GraphError::NonFiniteWeight { src, dst });
            }
            if e.weight == 0.0 {
                return Err(GraphError::ZeroWeight { src, dst });
            }
        }
        edges.sort_by_key(|e| (e.src, e.dst));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst))
        {
            return Err(GraphError::DuplicateEdge {
                src: w[0].src,
                dst: w[0].dst,
            });
        }

        let mut out_offsets = vec![0; n + 1];
        for e in &edges {
            out_offsets[e.src + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
        }

        Ok(Self {
            n,
            edges,
            out_offsets,
            external_ids,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: usize) -> &[Edge] {
        &self.edges[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges(v).iter().map(|e| e.dst)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out_edges(src)
            .binary_search_by_key(&dst, |e| e.dst)
            .is_ok()
    }

    pub fn external_id(&self, v: usize) -> u64 {
        self.external_ids[v]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    /// Internal index of an external node id.
    pub fn internal_id(&self, external: u64) -> Option<usize> {
        self.external_ids.iter().position(|&id| id == external)
    }

    /// Map from external to internal ids.
    pub fn id_map(&self) -> BTreeMap<u64, usize> {
        self.external_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect()
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    /// Dense state matrix of `x' = A x`: an edge `i -> j` of weight `w`
    /// contributes `A[(j, i)] = w`.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.dst, e.src)] = e.weight;
        }
        a
    }

    /// Same topology with weights replaced by `weight(edge_index)`.
    pub fn reweighted(&self, mut weight: impl FnMut(usize) -> f64) -> Result<Self, GraphError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| Edge::new(e.src, e.dst, weight(k)))
            .collect();
        Self::with_ids(self.n, edges, self.external_ids.clone())
    }

    /// Builds the pattern graph of a square state matrix (`A[(j, i)] != 0`
    /// becomes the edge `i -> j` with that weight).
    pub fn from_state_matrix(a: &DMatrix<f64>) -> Result<Self, GraphError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(GraphError::InvalidParameters(format!(
                "state matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = a[(j, i)];
                if w != 0.0 {
                    edges.push(Edge::new(i, j, w));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Edge-list text in external ids; isolated nodes are emitted as
    /// single-id lines so that parsing the output reproduces the graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let mut touched = vec![false; self.n];
        for e in &self.edges {
            touched[e.src] = true;
            touched[e.dst] = true;
        }
        for (v, _) in touched.iter().enumerate().filter(|(_, &t)| !t) {
            out.push_str(&format!("{}\n", self.external_ids[v]));
        }
        let unweighted = self.is_unweighted();
        for e in &self.edges {
            let (s, d) = (self.external_ids[e.src], self.external_ids[e.dst]);
            if unweighted {
                out.push_str(&format!("{s} {d}\n"));
            } else {
                out.push_str(&format!("{s} {d} {:?}\n", e.weight));
            }
        }
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson::from_graph(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_endpoints() {
        let dup = DirectedGraph::from_pairs(3, &[(0, 1), (0, 1)]);
        assert_eq!(dup, Err(GraphError::DuplicateEdge { src: 0, dst: 1 }));
        let oob = DirectedGraph::from_pairs(2, &[(0, 2)]);
        assert!(matches!(oob, Err(GraphError::EndpointOutOfRange { .. })));
        let zero = DirectedGraph::new(2, [Edge::new(0, 1, 0.0)]);
        assert!(matches!(zero, Err(GraphError::ZeroWeight { .. })));
    }

    #[test]
    fn adjacency_uses_destination_rows() {
        let g = DirectedGraph::new(2, [Edge::new(0, 1, 2.5)]).unwrap();
        let a = g.adjacency_matrix();
        assert_eq!(a[(1, 0)], 2.5);
        assert_eq!(a[(0, 1)], 0.0);
        assert_eq!(DirectedGraph::from_state_matrix(&a).unwrap(), g);
    }

    #[test]
    fn out_edges_are_sorted() {
        let g = DirectedGraph::from_pairs(4, &[(2, 3), (0, 2), (0, 1), (2, 0)]).unwrap();
        assert_eq!(g.successors(0).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(g.successors(1).count(), 0);
        assert_eq!(g.successors(2).collect::<Vec<_>>(), vec![0, 3]);
        assert!(g.has_edge(2, 3));
        assert!(!g.has_edge(3, 2));
    }
}
