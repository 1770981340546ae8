use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DirectedGraph, Edge, GraphError};

/// Erdős–Rényi digraph with exactly `round(mu * n / 2)` distinct edges and no
/// self-loops. `mu` is the mean total (in + out) degree.
pub fn generate_er(n: usize, mu: f64, seed: u64) -> Result<DirectedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameters("ER needs n >= 1".into()));
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(GraphError::InvalidParameters(format!(
            "ER mean degree must be finite and >= 0, got {mu}"
        )));
    }
    let m = (mu * n as f64 / 2.0).round() as usize;
    let slots = n * (n - 1);
    if m > slots {
        return Err(GraphError::InvalidParameters(format!(
            "{m} edges requested but only {slots} fit in a {n}-node digraph without self-loops"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = index::sample(&mut rng, slots, m).into_iter().map(|k| {
        // Slot k enumerates the off-diagonal (src, dst) pairs row by row.
        let src = k / (n - 1);
        let r = k % (n - 1);
        let dst = if r < src { r } else { r + 1 };
        Edge::unit(src, dst)
    });
    DirectedGraph::new(n, edges)
}

/// Barabási–Albert growth with uniformly random edge orientation.
///
/// Starts from a star on nodes `0..=m`; every later node attaches `m` edges
/// to distinct existing nodes chosen with probability proportional to their
/// current total degree. Each edge then points either way with probability
/// one half. The result has `m * (n - m)` edges.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<DirectedGraph, GraphError> {
    if m == 0 || n <= m {
        return Err(GraphError::InvalidParameters(format!(
            "BA needs n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    grow_ba(n, m, |_| m, seed)
}

/// Barabási–Albert growth tuned to exactly `edges` edges. The star has
/// `m = ceil(edges / (n - 1))` leaves; later nodes attach `m` or `m - 1`
/// edges, the larger count going to the earliest arrivals.
pub fn generate_ba_sized(n: usize, edges: usize, seed: u64) -> Result<DirectedGraph, GraphError> {
    if n < 2 || edges < n - 1 {
        return Err(GraphError::InvalidParameters(format!(
            "sized BA needs n >= 2 and at least n - 1 edges, got n = {n}, edges = {edges}"
        )));
    }
    let m = edges.div_ceil(n - 1);
    if n <= m || m * (n - m) < edges {
        return Err(GraphError::InvalidParameters(format!(
            "{edges} edges do not fit a {n}-node BA graph"
        )));
    }
    let later = n - m - 1;
    let rest = edges - m;
    // (m - 1) * later <= rest <= m * later, so `heavy` arrivals attach m.
    let heavy = rest - (m - 1) * later;
    grow_ba(n, m, |k| if k < heavy { m } else { m - 1 }, seed)
}

/// `attach(k)` is the edge count of the `k`-th node added after the star.
fn grow_ba(
    n: usize,
    m: usize,
    attach: impl Fn(usize) -> usize,
    seed: u64,
) -> Result<DirectedGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (1..=m).map(|leaf| (0, leaf)).collect();
    // One entry per edge endpoint, so uniform draws are degree-proportional.
    let mut endpoints: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();

    for new in (m + 1)..n {
        let k = attach(new - m - 1);
        let mut targets: Vec<usize> = Vec::with_capacity(k);
        while targets.len() < k {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            pairs.push((new, t));
            endpoints.push(new);
            endpoints.push(t);
        }
    }

    let edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(a, b)| {
            if rng.random_bool(0.5) {
                Edge::unit(a, b)
            } else {
                Edge::unit(b, a)
            }
        })
        .collect();
    DirectedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn er_hits_benchmark_size() {
        let g = generate_er(100, 6.0, 1).unwrap();
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.edge_count(), 300);
    }

    #[test]
    fn er_zero_degree_and_infeasible() {
        assert_eq!(generate_er(10, 0.0, 3).unwrap().edge_count(), 0);
        assert!(generate_er(10, 30.0, 3).is_err());
        assert!(generate_er(0, 1.0, 3).is_err());
        // n(n-1) = 90 edges is the dense limit.
        assert_eq!(generate_er(10, 18.0, 3).unwrap().edge_count(), 90);
    }

    #[test]
    fn ba_small_cases() {
        assert_eq!(generate_ba(2, 1, 9).unwrap().edge_count(), 1);
        assert!(generate_ba(3, 3, 9).is_err());
        assert!(generate_ba(3, 0, 9).is_err());
        let g = generate_ba(100, 4, 5).unwrap();
        assert!((300..=400).contains(&g.edge_count()), "{}", g.edge_count());
    }

    #[test]
    fn sized_ba_hits_requested_edges() {
        let g = generate_ba_sized(100, 344, 2).unwrap();
        assert_eq!(g.edge_count(), 344);
        assert_eq!(generate_ba_sized(100, 384, 2).unwrap().edge_count(), 384);
        assert_eq!(generate_ba_sized(5, 4, 2).unwrap().edge_count(), 4);
        assert!(generate_ba_sized(5, 3, 2).is_err());
        assert!(generate_ba_sized(5, 10, 2).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            generate_er(50, 3.0, 42).unwrap(),
            generate_er(50, 3.0, 42).unwrap()
        );
        assert_eq!(
            generate_ba(50, 2, 42).unwrap(),
            generate_ba(50, 2, 42).unwrap()
        );
        assert_ne!(
            generate_er(50, 3.0, 42).unwrap(),
            generate_er(50, 3.0, 43).unwrap()
        );
    }

    proptest! {
        #[test]
        fn er_edge_count_is_exact(n in 1usize..60, mu in 0.0f64..8.0, seed in any::<u64>()) {
            let want = (mu * n as f64 / 2.0).round() as usize;
            prop_assume!(want <= n * (n - 1));
            let g = generate_er(n, mu, seed).unwrap();
            prop_assert_eq!(g.edge_count(), want);
            prop_assert!(g.edges().iter().all(|e| e.src != e.dst));
        }

        #[test]
        fn generated_graphs_round_trip(n in 4usize..40, m in 1usize..4, seed in any::<u64>()) {
            prop_assume!(n > m);
            let ba = generate_ba(n, m, seed).unwrap();
            prop_assert_eq!(ba.edge_count(), m * (n - m));
            prop_assert_eq!(super::super::parse_edge_list(&ba.to_edge_list()).unwrap(), ba);
            let er = generate_er(n, 2.5, seed).unwrap();
            prop_assert_eq!(super::super::parse_edge_list(&er.to_edge_list()).unwrap(), er);
        }
    }
}
