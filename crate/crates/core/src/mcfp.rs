//! Control paths and free cycles read off optimal flows, and the
//! controllable-subset queries built on them.

use std::fmt::Write as _;

use thiserror::Error;

use crate::flow::{
    build_sufficiency_flow_network, check_flow, min_cost_flow, Flow, FlowError, FlowNetwork,
    IncrementalSolver,
};
use crate::graph::{driver_count, DirectedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McfpError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("target {r} outside 1..={n}")]
    TargetOutOfRange { r: usize, n: usize },
}

/// Vertex-disjoint stems (each headed by its driver attachment point) and
/// cycles (closing edge implicit).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathCover {
    pub paths: Vec<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
    /// Sorted union of all path and cycle nodes.
    pub covered: Vec<usize>,
}

impl PathCover {
    pub fn new(paths: Vec<Vec<usize>>, cycles: Vec<Vec<usize>>) -> Self {
        let mut covered: Vec<usize> = paths.iter().chain(&cycles).flatten().copied().collect();
        covered.sort_unstable();
        Self {
            paths,
            cycles,
            covered,
        }
    }

    pub fn covered_count(&self) -> usize {
        self.covered.len()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p[0]).collect()
    }

    /// Checks disjointness, that every hop is a graph edge, and the
    /// covered-set accounting.
    pub fn validate(&self, g: &DirectedGraph) -> Result<(), McfpError> {
        let bad = |msg: String| Err(McfpError::InvalidCover(msg));
        let mut seen = vec![false; g.node_count()];
        for seq in self.paths.iter().chain(&self.cycles) {
            if seq.is_empty() {
                return bad("empty path or cycle".into());
            }
            for &v in seq {
                if v >= g.node_count() {
                    return bad(format!("node {v} out of range"));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return bad(format!("node {v} appears twice"));
                }
            }
            for w in seq.windows(2) {
                if !g.has_edge(w[0], w[1]) {
                    return bad(format!("missing edge {} -> {}", w[0], w[1]));
                }
            }
        }
        for c in &self.cycles {
            let (last, first) = (c[c.len() - 1], c[0]);
            if !g.has_edge(last, first) {
                return bad(format!("cycle closing edge {last} -> {first} missing"));
            }
        }
        let total: usize = self.paths.iter().chain(&self.cycles).map(Vec::len).sum();
        let mut sorted: Vec<usize> = (0..g.node_count()).filter(|&v| seen[v]).collect();
        sorted.dedup();
        if total != self.covered.len() || sorted != self.covered {
            return bad("covered set does not match paths and cycles".into());
        }
        Ok(())
    }
}

/// Traces the unit flow into stems and cycles. Stems start at each node fed
/// by the source, in ascending order; cycles start at the lowest remaining
/// node carrying flow.
pub fn extract_paths_cycles(
    g: &DirectedGraph,
    network: &FlowNetwork,
    flow: &Flow,
) -> Result<PathCover, McfpError> {
    check_flow(network, flow)?;
    let n = g.node_count();
    if network.node_count() != n || network.arcs().len() != 3 * n + g.edge_count() {
        return Err(McfpError::InvalidCover(
            "flow network was not built from this graph".into(),
        ));
    }
    let f = &flow.values;
    let mut succ = vec![usize::MAX; n];
    for (k, e) in g.edges().iter().enumerate() {
        if f[network.edge_arc(k)] == 1 {
            succ[e.src] = e.dst;
        }
    }

    let mut visited = vec![false; n];
    let mut paths = Vec::new();
    for head in (0..n).filter(|&v| f[network.source_arc(v)] == 1) {
        let mut path = Vec::new();
        let mut v = head;
        loop {
            visited[v] = true;
            path.push(v);
            if f[network.sink_arc(v)] == 1 {
                break;
            }
            v = succ[v];
        }
        paths.push(path);
    }

    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] || f[network.inner_arc(start)] == 0 {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !visited[v] {
            visited[v] = true;
            cycle.push(v);
            v = succ[v];
        }
        cycles.push(cycle);
    }

    let cover = PathCover::new(paths, cycles);
    debug_assert_eq!(cover.covered_count() as i64, -flow.cost);
    Ok(cover)
}

/// Largest node set controllable with exactly `m` controllers, with the
/// cover that attains it.
pub fn max_controllable_subset(
    g: &DirectedGraph,
    m: usize,
) -> Result<(PathCover, usize), McfpError> {
    let network = build_sufficiency_flow_network(g, m)?;
    let flow = min_cost_flow(&network)?;
    let cover = extract_paths_cycles(g, &network, &flow)?;
    let rmax = cover.covered_count();
    Ok((cover, rmax))
}

/// Fewest controllers whose best cover reaches `r_target` nodes.
pub fn min_controllers_for(
    g: &DirectedGraph,
    r_target: usize,
) -> Result<(usize, PathCover), McfpError> {
    let n = g.node_count();
    if r_target == 0 || r_target > n {
        return Err(McfpError::TargetOutOfRange { r: r_target, n });
    }
    let mut solver = IncrementalSolver::new(g)?;
    loop {
        let covered = -solver.add_unit()?;
        if covered as usize >= r_target {
            let cover = extract_paths_cycles(g, solver.network(), &solver.flow())?;
            return Ok((solver.units(), cover));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurvePoint {
    pub m: usize,
    pub rmax: usize,
}

/// `rmax(M)` for `M = 1 ..= Mstar(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllabilityCurve {
    pub n: usize,
    pub mstar: usize,
    pub points: Vec<CurvePoint>,
}

impl ControllabilityCurve {
    pub fn frac_controllable(&self, p: &CurvePoint) -> f64 {
        p.rmax as f64 / self.n as f64
    }

    pub fn frac_drivers_normalized(&self, p: &CurvePoint) -> f64 {
        p.m as f64 / self.mstar as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("M,rmax,frac_controllable,frac_drivers_normalized\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?}",
                p.m,
                p.rmax,
                self.frac_controllable(p),
                self.frac_drivers_normalized(p)
            );
        }
        out
    }
}

/// One warm-started sweep of the controller count until the whole graph is
/// covered. An empty graph yields an empty curve.
pub fn controllability_curve(g: &DirectedGraph) -> Result<ControllabilityCurve, McfpError> {
    let n = g.node_count();
    let mut points = Vec::new();
    if n > 0 {
        let mut solver = IncrementalSolver::new(g)?;
        loop {
            let rmax = (-solver.add_unit()?) as usize;
            points.push(CurvePoint {
                m: solver.units(),
                rmax,
            });
            if rmax == n {
                break;
            }
        }
    }
    let mstar = points.len().max(1);
    debug_assert!(n == 0 || mstar == driver_count(g));
    Ok(ControllabilityCurve { n, mstar, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;
    use proptest::prelude::*;

    /// Best cover with exactly `m` paths, by enumerating every way of giving
    /// each node at most one chosen out-edge with in-degree at most one.
    /// The chosen edges `S` form disjoint paths and cycles over the touched
    /// nodes `T`, using `|T| - |S|` paths; the rest are singletons.
    fn brute_force_rmax(g: &DirectedGraph, m: usize) -> usize {
        let n = g.node_count();
        let options: Vec<Vec<Option<usize>>> = (0..n)
            .map(|v| {
                std::iter::once(None)
                    .chain(g.successors(v).map(Some))
                    .collect()
            })
            .collect();
        let mut choice = vec![0usize; n];
        let mut best = 0;
        loop {
            let mut indeg = vec![0u8; n];
            let mut touched = vec![false; n];
            let mut edges = 0;
            let mut ok = true;
            for v in 0..n {
                if let Some(w) = options[v][choice[v]] {
                    indeg[w] += 1;
                    ok &= indeg[w] <= 1;
                    touched[v] = true;
                    touched[w] = true;
                    edges += 1;
                }
            }
            let t = touched.iter().filter(|&&b| b).count();
            if ok && t - edges <= m && edges + m <= n {
                best = best.max(m + edges);
            }
            let mut k = 0;
            while k < n {
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == n {
                return best;
            }
        }
    }

    fn chain(n: usize) -> DirectedGraph {
        let pairs: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        DirectedGraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn chain_is_one_stem() {
        let (cover, rmax) = max_controllable_subset(&chain(3), 1).unwrap();
        assert_eq!(cover.paths, vec![vec![0, 1, 2]]);
        assert!(cover.cycles.is_empty());
        assert_eq!(rmax, 3);
        assert_eq!(max_controllable_subset(&chain(4), 1).unwrap().1, 4);
    }

    #[test]
    fn cycle_is_free() {
        let g = DirectedGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let (cover, rmax) = max_controllable_subset(&g, 1).unwrap();
        assert_eq!(cover.paths, vec![vec![3]]);
        assert_eq!(cover.cycles, vec![vec![0, 1, 2]]);
        assert_eq!(rmax, 4);
        cover.validate(&g).unwrap();
    }

    #[test]
    fn edgeless_graph_needs_singletons() {
        let g = DirectedGraph::from_pairs(5, &[]).unwrap();
        assert_eq!(max_controllable_subset(&g, 3).unwrap().1, 3);
        assert_eq!(min_controllers_for(&g, 3).unwrap().0, 3);
        let g3 = DirectedGraph::from_pairs(3, &[]).unwrap();
        let curve = controllability_curve(&g3).unwrap();
        let pts: Vec<_> = curve.points.iter().map(|p| (p.m, p.rmax)).collect();
        assert_eq!(pts, vec![(1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn chain_curve_and_full_target() {
        assert_eq!(min_controllers_for(&chain(6), 6).unwrap().0, 1);
        let curve = controllability_curve(&chain(4)).unwrap();
        assert_eq!(curve.points, vec![CurvePoint { m: 1, rmax: 4 }]);
        assert_eq!(
            curve.to_csv(),
            "M,rmax,frac_controllable,frac_drivers_normalized\n1,4,1.0,1.0\n"
        );
    }

    #[test]
    fn out_of_range_queries() {
        let g = chain(3);
        assert!(max_controllable_subset(&g, 0).is_err());
        assert!(max_controllable_subset(&g, 4).is_err());
        assert!(min_controllers_for(&g, 0).is_err());
        assert!(min_controllers_for(&g, 4).is_err());
    }

    #[test]
    fn validation_rejects_broken_covers() {
        let g = chain(3);
        assert!(PathCover::new(vec![vec![0, 2]], vec![])
            .validate(&g)
            .is_err());
        assert!(PathCover::new(vec![vec![0, 1], vec![1]], vec![])
            .validate(&g)
            .is_err());
        assert!(PathCover::new(vec![], vec![vec![0, 1]])
            .validate(&g)
            .is_err());
        assert!(PathCover::new(vec![vec![0, 1, 2]], vec![])
            .validate(&g)
            .is_ok());
    }

    #[test]
    fn every_three_node_digraph_matches_enumeration() {
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|s| (0..3).map(move |d| (s, d))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let chosen: Vec<_> = (0..pairs.len())
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| pairs[k])
                .collect();
            let g = DirectedGraph::from_pairs(3, &chosen).unwrap();
            for m in 1..=3 {
                let (cover, rmax) = max_controllable_subset(&g, m).unwrap();
                assert_eq!(rmax, brute_force_rmax(&g, m), "{chosen:?} m={m}");
                assert_eq!(cover.paths.len(), m);
                cover.validate(&g).unwrap();
            }
        }
    }

    #[test]
    fn full_target_matches_matching_bound() {
        for seed in 0..20 {
            let g = generate_er(40, 2.0 + (seed % 4) as f64, seed).unwrap();
            let (mstar, cover) = min_controllers_for(&g, 40).unwrap();
            assert_eq!(mstar, driver_count(&g));
            assert_eq!(cover.covered_count(), 40);
            assert_eq!(controllability_curve(&g).unwrap().mstar, mstar);
        }
    }

    fn small_digraph() -> impl Strategy<Value = DirectedGraph> {
        (1usize..=6).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..=2 * n).prop_map(move |mut pairs| {
                pairs.sort_unstable();
                pairs.dedup();
                DirectedGraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn optimum_matches_enumeration(g in small_digraph()) {
            for m in 1..=g.node_count() {
                let (cover, rmax) = max_controllable_subset(&g, m).unwrap();
                prop_assert_eq!(rmax, brute_force_rmax(&g, m));
                prop_assert_eq!(cover.paths.len(), m);
                prop_assert!(cover.validate(&g).is_ok());
            }
        }

        #[test]
        fn curve_is_monotone_and_covers_everything(n in 4usize..80, mu in 0.5f64..5.0, seed in any::<u64>()) {
            let g = generate_er(n, mu, seed).unwrap();
            let curve = controllability_curve(&g).unwrap();
            prop_assert!(curve.points.windows(2).all(|w| w[0].rmax <= w[1].rmax));
            prop_assert_eq!(curve.points.last().unwrap().rmax, n);
            prop_assert!(curve.points.iter().all(|p| p.rmax <= n && p.rmax >= p.m));
            prop_assert_eq!(curve.mstar, driver_count(&g));
        }

        #[test]
        fn above_neutral_diagonal(n in 20usize..120, mu in 2.0f64..6.0, seed in any::<u64>()) {
            let g = generate_er(n, mu, seed).unwrap();
            let curve = controllability_curve(&g).unwrap();
            for p in &curve.points {
                prop_assert!(curve.frac_controllable(p) >= curve.frac_drivers_normalized(p));
            }
        }
    }
}
