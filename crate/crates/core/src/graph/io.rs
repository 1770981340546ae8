use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DirectedGraph, Edge, GraphError};

/// Parses whitespace-separated `src dst [weight]` lines.
///
/// Blank lines and lines starting with `#` are skipped. A line holding a
/// single id declares a (possibly isolated) node. External ids are remapped
/// to dense internal indices in ascending id order; a repeated `(src, dst)`
/// pair keeps the last weight seen.
pub fn parse_edge_list(text: &str) -> Result<DirectedGraph, GraphError> {
    let mut nodes = BTreeSet::new();
    let mut weights: BTreeMap<(u64, u64), f64> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_id = |tok: &str| {
            tok.parse::<u64>().map_err(|_| GraphError::Parse {
                line: line_no,
                reason: format!("node id {tok:?} is not a nonnegative integer"),
            })
        };
        match tokens.as_slice() {
            [v] => {
                nodes.insert(parse_id(v)?);
            }
            [s, d] | [s, d, _] => {
                let (src, dst) = (parse_id(s)?, parse_id(d)?);
                let weight = match tokens.get(2) {
                    None => 1.0,
                    Some(w) => w.parse::<f64>().map_err(|_| GraphError::Parse {
                        line: line_no,
                        reason: format!("weight {w:?} is not a number"),
                    })?,
                };
                if !weight.is_finite() {
                    return Err(GraphError::NonFiniteWeight { src, dst });
                }
                if weight == 0.0 {
                    return Err(GraphError::ZeroWeight { src, dst });
                }
                nodes.insert(src);
                nodes.insert(dst);
                weights.insert((src, dst), weight);
            }
            _ => {
                return Err(GraphError::Parse {
                    line: line_no,
                    reason: format!("expected `src dst [weight]`, found {} fields", tokens.len()),
                })
            }
        }
    }

    let external_ids: Vec<u64> = nodes.into_iter().collect();
    let index: BTreeMap<u64, usize> = external_ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let edges = weights
        .into_iter()
        .map(|((s, d), w)| Edge::new(index[&s], index[&d], w));
    DirectedGraph::with_ids(external_ids.len(), edges, external_ids)
}

/// JSON export: edges use internal indices, `id_map` maps external ids
/// (as strings, since JSON keys must be strings) to internal indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub id_map: BTreeMap<String, usize>,
}

impl GraphJson {
    pub fn from_graph(g: &DirectedGraph) -> Self {
        Self {
            n: g.node_count(),
            edges: g.edges().iter().map(|e| (e.src, e.dst, e.weight)).collect(),
            id_map: g
                .external_ids()
                .iter()
                .enumerate()
                .map(|(i, id)| (id.to_string(), i))
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<DirectedGraph, GraphError> {
        let mut external = vec![None; self.n];
        for (key, &internal) in &self.id_map {
            let id = key.parse::<u64>().map_err(|_| GraphError::Parse {
                line: 0,
                reason: format!("id_map key {key:?} is not a nonnegative integer"),
            })?;
            let slot = external
                .get_mut(internal)
                .ok_or(GraphError::EndpointOutOfRange {
                    index: internal,
                    n: self.n,
                })?;
            *slot = Some(id);
        }
        let external: Option<Vec<u64>> = external.into_iter().collect();
        let external = external.ok_or(GraphError::IdMapLength {
            got: self.id_map.len(),
            expected: self.n,
        })?;
        let edges = self.edges.iter().map(|&(s, d, w)| Edge::new(s, d, w));
        DirectedGraph::with_ids(self.n, edges, external)
    }
}
