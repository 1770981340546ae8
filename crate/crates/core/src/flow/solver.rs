use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::{Flow, FlowError, FlowNetwork, SINK, SOURCE};
use crate::graph::DirectedGraph;

const NONE: usize = usize::MAX;

/// Residual graph: arc `k` of the network becomes residual arcs `2k`
/// (forward) and `2k + 1` (backward).
#[derive(Debug, Clone)]
struct Residual {
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(network: &FlowNetwork, values: &[i64]) -> Self {
        let m = network.arcs().len();
        let mut to = Vec::with_capacity(2 * m);
        let mut cap = Vec::with_capacity(2 * m);
        let mut cost = Vec::with_capacity(2 * m);
        let mut adj = vec![Vec::new(); network.vertex_count()];
        for (k, (a, &f)) in network.arcs().iter().zip(values).enumerate() {
            to.extend([a.head, a.tail]);
            cap.extend([a.capacity - f, f]);
            cost.extend([a.cost, -a.cost]);
            adj[a.tail].push(2 * k);
            adj[a.head].push(2 * k + 1);
        }
        Self { to, cap, cost, adj }
    }

    fn push(&mut self, arc: usize, amount: i64) {
        self.cap[arc] -= amount;
        self.cap[arc ^ 1] += amount;
    }

    fn tail(&self, arc: usize) -> usize {
        self.to[arc ^ 1]
    }

    fn flow_values(&self) -> Vec<i64> {
        (0..self.to.len() / 2)
            .map(|k| self.cap[2 * k + 1])
            .collect()
    }

    /// Bellman–Ford negative-cycle search over arcs with spare capacity.
    /// Returns the residual arcs of one negative cycle, in order.
    fn negative_cycle(&self) -> Option<Vec<usize>> {
        let v_count = self.adj.len();
        let mut dist = vec![0i64; v_count];
        let mut pred = vec![NONE; v_count];
        let mut last = NONE;
        for _ in 0..v_count {
            last = NONE;
            for u in 0..v_count {
                for &a in &self.adj[u] {
                    if self.cap[a] <= 0 {
                        continue;
                    }
                    let v = self.to[a];
                    if dist[u] + self.cost[a] < dist[v] {
                        dist[v] = dist[u] + self.cost[a];
                        pred[v] = a;
                        last = v;
                    }
                }
            }
            if last == NONE {
                return None;
            }
        }
        // `last` was relaxed in round |V|, so walking back |V| steps lands on
        // a vertex of the cycle.
        let mut v = last;
        for _ in 0..v_count {
            v = self.tail(pred[v]);
        }
        let start = v;
        let mut cycle = Vec::new();
        loop {
            let a = pred[v];
            cycle.push(a);
            v = self.tail(a);
            if v == start {
                break;
            }
        }
        cycle.reverse();
        Some(cycle)
    }
}

/// Successive shortest paths over a pseudoflow whose residual costs are all
/// nonnegative under `potential`.
#[derive(Debug, Clone)]
struct ShortestPathEngine {
    residual: Residual,
    potential: Vec<i64>,
    excess: Vec<i64>,
    cost: i64,
}

impl ShortestPathEngine {
    /// Saturates every negative-cost arc, which leaves only nonnegative
    /// residual costs, so zero potentials are valid. The imbalance this
    /// creates is repaired by `resolve`.
    fn saturated(network: &FlowNetwork) -> Self {
        let mut values = vec![0i64; network.arcs().len()];
        let mut excess = network.supply().to_vec();
        let mut cost = 0;
        for (k, a) in network.arcs().iter().enumerate() {
            if a.cost < 0 {
                values[k] = a.capacity;
                excess[a.tail] -= a.capacity;
                excess[a.head] += a.capacity;
                cost += a.cost * a.capacity;
            }
        }
        Self {
            residual: Residual::new(network, &values),
            potential: vec![0; network.vertex_count()],
            excess,
            cost,
        }
    }

    fn resolve(&mut self) -> Result<(), FlowError> {
        while self.excess.iter().any(|&e| e > 0) {
            self.augment_once()?;
        }
        if self.excess.iter().any(|&e| e != 0) {
            return Err(FlowError::Infeasible);
        }
        Ok(())
    }

    /// Dijkstra from every excess vertex at once to the nearest deficit
    /// vertex, then one augmentation along that path. Heap order on
    /// `(distance, vertex)` makes ties deterministic.
    fn augment_once(&mut self) -> Result<(), FlowError> {
        let v_count = self.excess.len();
        let mut dist = vec![i64::MAX; v_count];
        let mut parent = vec![NONE; v_count];
        let mut done = vec![false; v_count];
        let mut heap = BinaryHeap::new();
        for (v, &e) in self.excess.iter().enumerate() {
            if e > 0 {
                dist[v] = 0;
                heap.push(Reverse((0i64, v)));
            }
        }

        let mut target = NONE;
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            if self.excess[u] < 0 {
                target = u;
                break;
            }
            for &a in &self.residual.adj[u] {
                if self.residual.cap[a] <= 0 {
                    continue;
                }
                let v = self.residual.to[a];
                let reduced = self.residual.cost[a] + self.potential[u] - self.potential[v];
                debug_assert!(reduced >= 0, "negative reduced cost on arc {a}");
                let nd = d + reduced;
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = a;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if target == NONE {
            return Err(FlowError::Infeasible);
        }

        let reach = dist[target];
        for (p, &d) in self.potential.iter_mut().zip(&dist) {
            *p += d.min(reach);
        }

        let mut path = Vec::new();
        let mut v = target;
        while parent[v] != NONE {
            path.push(parent[v]);
            v = self.residual.tail(parent[v]);
        }
        let source = v;
        let mut amount = self.excess[source].min(-self.excess[target]);
        for &a in &path {
            amount = amount.min(self.residual.cap[a]);
        }
        for &a in &path {
            self.residual.push(a, amount);
            self.cost += self.residual.cost[a] * amount;
        }
        self.excess[source] -= amount;
        self.excess[target] += amount;
        Ok(())
    }
}

/// Minimum-cost flow under circulation semantics: the optimum may route
/// units around negative-cost cycles that never touch the source or sink.
pub fn min_cost_flow(network: &FlowNetwork) -> Result<Flow, FlowError> {
    let mut engine = ShortestPathEngine::saturated(network);
    engine.resolve()?;
    let flow = Flow::new(network, engine.residual.flow_values());
    debug_assert_eq!(flow.cost, engine.cost);
    Ok(flow)
}

/// Reference solver: route the supply along plain augmenting paths, then
/// cancel negative residual cycles (Bellman–Ford) until none remain.
/// Exact but far slower than [`min_cost_flow`].
pub fn min_cost_flow_cycle_canceling(network: &FlowNetwork) -> Result<Flow, FlowError> {
    let mut residual = Residual::new(network, &vec![0; network.arcs().len()]);
    for _ in 0..network.units() {
        let mut parent = vec![NONE; network.vertex_count()];
        let mut seen = vec![false; network.vertex_count()];
        let mut queue = VecDeque::from([SOURCE]);
        seen[SOURCE] = true;
        while let Some(u) = queue.pop_front() {
            for &a in &residual.adj[u] {
                let v = residual.to[a];
                if residual.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    parent[v] = a;
                    queue.push_back(v);
                }
            }
        }
        if !seen[SINK] {
            return Err(FlowError::Infeasible);
        }
        let mut v = SINK;
        while v != SOURCE {
            let a = parent[v];
            residual.push(a, 1);
            v = residual.tail(a);
        }
    }
    while let Some(cycle) = residual.negative_cycle() {
        let amount = cycle.iter().map(|&a| residual.cap[a]).min().unwrap_or(0);
        for &a in &cycle {
            residual.push(a, amount);
        }
    }
    Ok(Flow::new(network, residual.flow_values()))
}

/// Optimality certificate: a feasible flow is minimum-cost iff its residual
/// graph has no negative-cost cycle.
pub fn has_negative_residual_cycle(network: &FlowNetwork, flow: &Flow) -> bool {
    Residual::new(network, &flow.values)
        .negative_cycle()
        .is_some()
}

/// Min-cost flow that grows the controller count one unit at a time.
///
/// Starts from the optimal circulation (zero source supply); each
/// [`add_unit`](Self::add_unit) adds one source/sink unit and one shortest
/// augmenting path, which keeps the flow optimal for the new supply.
#[derive(Debug, Clone)]
pub struct IncrementalSolver {
    network: FlowNetwork,
    engine: ShortestPathEngine,
}

impl IncrementalSolver {
    pub fn new(g: &DirectedGraph) -> Result<Self, FlowError> {
        let network = FlowNetwork::with_supply(g, 0);
        let mut engine = ShortestPathEngine::saturated(&network);
        engine.resolve()?;
        Ok(Self { network, engine })
    }

    /// Current number of source-to-sink units.
    pub fn units(&self) -> usize {
        self.network.units()
    }

    pub fn cost(&self) -> i64 {
        self.engine.cost
    }

    pub fn add_unit(&mut self) -> Result<i64, FlowError> {
        let n = self.network.node_count();
        let m = self.units() + 1;
        if m > n {
            return Err(FlowError::SupplyOutOfRange { m, n });
        }
        self.network.supply[SOURCE] += 1;
        self.network.supply[SINK] -= 1;
        self.engine.excess[SOURCE] += 1;
        self.engine.excess[SINK] -= 1;
        self.engine.resolve()?;
        Ok(self.engine.cost)
    }

    pub fn network(&self) -> &FlowNetwork {
        &self.network
    }

    pub fn flow(&self) -> Flow {
        Flow::new(&self.network, self.engine.residual.flow_values())
    }
}
