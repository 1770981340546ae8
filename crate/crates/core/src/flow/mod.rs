//! The vertex-split s–t network whose min-cost flows are maximum path/cycle
//! covers, and an exact integer solver for it.
//!
//! Vertex layout: `0` is the source, `1` the sink, and original node `v`
//! becomes `in(v) = 2 + 2v` and `out(v) = 3 + 2v`. Arcs are stored in four
//! consecutive groups: `s -> in(v)`, `out(v) -> t`, `in(v) -> out(v)` (cost
//! -1), then `out(u) -> in(w)` for every graph edge in edge order.

mod solver;

pub use solver::{
    has_negative_residual_cycle, min_cost_flow, min_cost_flow_cycle_canceling, IncrementalSolver,
};

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::DirectedGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("controller count {m} outside 1..={n}")]
    SupplyOutOfRange { m: usize, n: usize },
    #[error("no augmenting path left; network is infeasible")]
    Infeasible,
    #[error("flow has {got} arc values, network has {expected} arcs")]
    LengthMismatch { got: usize, expected: usize },
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    pub cost: i64,
}

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

pub fn in_vertex(v: usize) -> usize {
    2 + 2 * v
}

pub fn out_vertex(v: usize) -> usize {
    3 + 2 * v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
    supply: Vec<i64>,
}

impl FlowNetwork {
    pub(crate) fn with_supply(g: &DirectedGraph, m: usize) -> Self {
        let n = g.node_count();
        let mut arcs = Vec::with_capacity(3 * n + g.edge_count());
        let unit = |tail, head, cost| Arc {
            tail,
            head,
            capacity: 1,
            cost,
        };
        arcs.extend((0..n).map(|v| unit(SOURCE, in_vertex(v), 0)));
        arcs.extend((0..n).map(|v| unit(out_vertex(v), SINK, 0)));
        arcs.extend((0..n).map(|v| unit(in_vertex(v), out_vertex(v), -1)));
        arcs.extend(
            g.edges()
                .iter()
                .map(|e| unit(out_vertex(e.src), in_vertex(e.dst), 0)),
        );
        let mut supply = vec![0; 2 * n + 2];
        supply[SOURCE] = m as i64;
        supply[SINK] = -(m as i64);
        Self {
            node_count: n,
            arcs,
            supply,
        }
    }

    /// Number of nodes of the original graph.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn vertex_count(&self) -> usize {
        self.supply.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn supply(&self) -> &[i64] {
        &self.supply
    }

    /// Units shipped from source to sink (the controller count M).
    pub fn units(&self) -> usize {
        self.supply[SOURCE] as usize
    }

    pub fn source_arc(&self, v: usize) -> usize {
        v
    }

    pub fn sink_arc(&self, v: usize) -> usize {
        self.node_count + v
    }

    pub fn inner_arc(&self, v: usize) -> usize {
        2 * self.node_count + v
    }

    /// Arc carrying the graph edge with index `k` in `DirectedGraph::edges`.
    pub fn edge_arc(&self, k: usize) -> usize {
        3 * self.node_count + k
    }

    /// DIMACS-style text dump (1-based vertex ids).
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "c vertex 1 = source, 2 = sink, 2v+3 = in(v), 2v+4 = out(v)"
        );
        let _ = writeln!(out, "p min {} {}", self.vertex_count(), self.arcs.len());
        for (id, &s) in self.supply.iter().enumerate() {
            if s != 0 {
                let _ = writeln!(out, "n {} {}", id + 1, s);
            }
        }
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "a {} {} 0 {} {}",
                a.tail + 1,
                a.head + 1,
                a.capacity,
                a.cost
            );
        }
        out
    }
}

/// Builds the unit-capacity network that ships `m` units from source to
/// sink, with cost -1 on every split arc `in(v) -> out(v)`.
pub fn build_sufficiency_flow_network(
    g: &DirectedGraph,
    m: usize,
) -> Result<FlowNetwork, FlowError> {
    let n = g.node_count();
    if m == 0 || m > n {
        return Err(FlowError::SupplyOutOfRange { m, n });
    }
    Ok(FlowNetwork::with_supply(g, m))
}

/// Integral flow indexed like `FlowNetwork::arcs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub values: Vec<i64>,
    pub cost: i64,
}

impl Flow {
    pub fn new(network: &FlowNetwork, values: Vec<i64>) -> Self {
        let cost = network
            .arcs
            .iter()
            .zip(&values)
            .map(|(a, f)| a.cost * f)
            .sum();
        Self { values, cost }
    }

    pub fn zero(network: &FlowNetwork) -> Self {
        Self::new(network, vec![0; network.arcs.len()])
    }
}

/// Checks capacity, nonnegativity and conservation against the supplies;
/// reports the first violation found.
pub fn check_flow(network: &FlowNetwork, flow: &Flow) -> Result<(), FlowError> {
    if flow.values.len() != network.arcs.len() {
        return Err(FlowError::LengthMismatch {
            got: flow.values.len(),
            expected: network.arcs.len(),
        });
    }
    let mut net_out = vec![0i64; network.vertex_count()];
    for (k, (a, &f)) in network.arcs.iter().zip(&flow.values).enumerate() {
        if f < 0 || f > a.capacity {
            return Err(FlowError::InvalidFlow(format!(
                "arc {k} ({} -> {}) carries {f}, capacity {}",
                a.tail, a.head, a.capacity
            )));
        }
        net_out[a.tail] += f;
        net_out[a.head] -= f;
    }
    for (v, (&out, &s)) in net_out.iter().zip(&network.supply).enumerate() {
        if out != s {
            return Err(FlowError::InvalidFlow(format!(
                "vertex {v} has net outflow {out}, supply {s}"
            )));
        }
    }
    let recomputed = Flow::new(network, flow.values.clone()).cost;
    if recomputed != flow.cost {
        return Err(FlowError::InvalidFlow(format!(
            "stored cost {} differs from arc total {recomputed}",
            flow.cost
        )));
    }
    Ok(())
}

pub fn validate_flow(network: &FlowNetwork, flow: &Flow) -> bool {
    check_flow(network, flow).is_ok()
}
