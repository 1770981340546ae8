//! Structural and numerical invariants checked on randomized instances.

mod common;

use std::collections::HashSet;

use common::random_matrix;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sufficient_control::edcp::edcp;
use sufficient_control::elpgm::{elpgm_optimize, ElpgmConfig};
use sufficient_control::graph::{generate_ba, generate_er, DirectedGraph};
use sufficient_control::lti::{
    control_cost, gramian, input_energy, output_controllable, ControlPlacement, OptimalInput,
    DEFAULT_STEPS,
};
use sufficient_control::mcfp::max_controllable_subset;

/// Same pattern, weights uniform in [0.5, 1.5].
fn randomized(g: &DirectedGraph, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    g.reweighted(|_| rng.random_range(0.5..1.5)).unwrap()
}

fn graph(n: usize, ba: bool, seed: u64) -> DirectedGraph {
    if ba {
        generate_ba(n, 2.min(n - 1).max(1), seed).unwrap()
    } else {
        generate_er(n, 2.5, seed).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Drivers at stem heads, one extra attachment per cycle from the first
    /// input column, and every covered node selected: output controllable.
    #[test]
    fn covers_are_realized_numerically(n in 3usize..=30, ba in any::<bool>(), seed in any::<u64>(), frac in 0.0f64..1.0) {
        let g = graph(n, ba, seed);
        let m = 1 + (frac * n as f64) as usize % n;
        let (cover, rmax) = max_controllable_subset(&g, m).unwrap();
        let a = randomized(&g, seed ^ 1).adjacency_matrix();
        let mut b = DMatrix::zeros(n, m);
        for (k, path) in cover.paths.iter().enumerate() {
            b[(path[0], k)] = 1.0;
        }
        for cycle in &cover.cycles {
            b[(*cycle.iter().min().unwrap(), 0)] = 1.0;
        }
        let covered: Vec<usize> = cover.paths.iter().chain(&cover.cycles).flatten().copied().collect();
        prop_assert_eq!(covered.len(), rmax);
        let mut c = DMatrix::zeros(rmax, n);
        for (r, &v) in covered.iter().enumerate() {
            c[(r, v)] = 1.0;
        }
        prop_assert!(output_controllable(&a, &b, &c));
    }

    #[test]
    fn gramian_is_symmetric_and_psd(n in 1usize..=10, m in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, n, m);
        let w = gramian(&a, &b, 2.0).unwrap();
        let scale = w.norm();
        prop_assert!((&w - w.transpose()).norm() <= 1e-12 * scale);
        let min_eig = w.symmetric_eigenvalues().min();
        prop_assert!(min_eig >= -1e-10 * scale);
    }

    #[test]
    fn edcp_output_contract(n in 4usize..=30, ba in any::<bool>(), seed in any::<u64>(), mf in 0.0f64..1.0, rf in 0.0f64..1.0) {
        let g = graph(n, ba, seed);
        let m = 1 + (mf * (n / 2) as f64) as usize;
        let (_, rmax) = max_controllable_subset(&g, m).unwrap();
        let r = m + ((rf * (rmax - m) as f64) as usize);
        let Ok(res) = edcp(&g, m, r, 2.0) else {
            return Ok(());
        };
        prop_assert_eq!(res.placement.controlled.len(), r);
        prop_assert_eq!(res.placement.drivers.len(), m);
        let mut seen = HashSet::new();
        for s in &res.segments {
            prop_assert!(s.iter().all(|&v| seen.insert(v)), "segments overlap");
            prop_assert!(s.windows(2).all(|w| g.has_edge(w[0], w[1])), "segment {:?} is not a path", s);
        }
        let a = randomized(&g, seed ^ 2).adjacency_matrix();
        prop_assert!(res.placement.is_output_controllable(&a).unwrap());
        prop_assert_eq!(edcp(&g, m, r, 2.0).unwrap(), res);
    }
}

#[test]
fn realized_energy_averages_to_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for case in 0..5 {
        let g = generate_er(8, 2.5, case).unwrap();
        let a = randomized(&g, case).adjacency_matrix();
        let p = ControlPlacement::new(vec![0, 1, 2], (0..6).collect(), 2.0).unwrap();
        let Ok(cost) = control_cost(&a, &p) else {
            continue;
        };
        let samples: Vec<f64> = (0..20)
            .map(|_| {
                let x0 = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
                let u = OptimalInput::new(&a, &p, &x0).unwrap();
                input_energy(|t| u.at(t), 2.0, DEFAULT_STEPS)
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / 20.0;
        let var = samples.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 19.0;
        let se = (var / 20.0).sqrt();
        assert!(
            (mean - cost).abs() <= 3.0 * se,
            "case {case}: mean {mean}, cost {cost}, se {se}"
        );
        checked += 1;
    }
    assert!(checked >= 3, "only {checked} controllable cases");
}

#[test]
fn elpgm_records_only_controllable_iterates() {
    let g = generate_er(7, 3.0, 5).unwrap();
    let a = g.adjacency_matrix();
    let cfg = ElpgmConfig {
        restarts: 3,
        k_f: 30,
        ..Default::default()
    };
    let res = elpgm_optimize(&a, 2, 5, &cfg).unwrap();
    assert!(res.trace.iter().all(|p| p.e.is_finite() && p.e > 0.0));
    assert!(res.best_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*res.best_history.last().unwrap(), res.e_best);
    assert!((control_cost(&a, &res.placement).unwrap() - res.e_best).abs() <= 1e-9 * res.e_best);
    assert_eq!(res, elpgm_optimize(&a, 2, 5, &cfg).unwrap());
}
