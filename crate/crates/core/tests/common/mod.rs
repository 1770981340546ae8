//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::Rng;
use sufficient_control::graph::DirectedGraph;

/// Off-diagonal ordered pairs of an `n`-node digraph, indexed by bit.
fn slots(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative per isomorphism class of loop-free digraphs on `n`
/// nodes, taken as the labeling with the smallest edge bitmask.
pub fn nonisomorphic_digraphs(n: usize) -> Vec<DirectedGraph> {
    let slots = slots(n);
    let index = |i: usize, j: usize| slots.iter().position(|&s| s == (i, j)).unwrap();
    // For each permutation, where every bit moves.
    let moves: Vec<Vec<u32>> = permutations(n)
        .iter()
        .map(|p| {
            slots
                .iter()
                .map(|&(i, j)| 1u32 << index(p[i], p[j]))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1u32 << slots.len()) {
        for mv in &moves {
            let mut image = 0u32;
            for (bit, &to) in mv.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    image |= to;
                }
            }
            if image < mask {
                continue 'mask;
            }
        }
        let pairs: Vec<(usize, usize)> = slots
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &s)| s)
            .collect();
        out.push(DirectedGraph::from_pairs(n, &pairs).unwrap());
    }
    out
}

pub fn weakly_connected(g: &DirectedGraph) -> bool {
    let n = g.node_count();
    if n == 0 {
        return true;
    }
    let mut undirected = vec![Vec::new(); n];
    for e in g.edges() {
        undirected[e.src].push(e.dst);
        undirected[e.dst].push(e.src);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &undirected[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Maximum matching between successors and predecessors inside `subset`,
/// by exhaustive augmenting search (the subsets here are tiny).
fn induced_matching(g: &DirectedGraph, subset: u32) -> usize {
    let n = g.node_count();
    let mut succ_of = vec![usize::MAX; n];
    let mut size = 0;
    for v in (0..n).filter(|v| subset >> v & 1 == 1) {
        let mut seen = vec![false; n];
        if augment(g, subset, v, &mut seen, &mut succ_of) {
            size += 1;
        }
    }
    size
}

fn augment(
    g: &DirectedGraph,
    subset: u32,
    v: usize,
    seen: &mut [bool],
    pred: &mut [usize],
) -> bool {
    for w in g.successors(v) {
        if subset >> w & 1 == 0 || seen[w] {
            continue;
        }
        seen[w] = true;
        if pred[w] == usize::MAX || augment(g, subset, pred[w], seen, pred) {
            pred[w] = v;
            return true;
        }
    }
    false
}

/// Largest node set coverable by `m` disjoint paths plus disjoint cycles.
/// A set `S` splits into exactly `|S| - matching(S)` paths and some cycles,
/// so the oracle scans all subsets.
pub fn brute_force_rmax(g: &DirectedGraph, m: usize) -> usize {
    let n = g.node_count();
    (0u32..(1u32 << n))
        .filter(|&s| {
            let size = s.count_ones() as usize;
            size - induced_matching(g, s) <= m
        })
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> DirectedGraph {
    let pairs: Vec<(usize, usize)> = slots(n)
        .into_iter()
        .filter(|_| rng.random_bool(p))
        .collect();
    DirectedGraph::from_pairs(n, &pairs).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Every node appears at most once across the paths and cycles.
pub fn disjoint(paths: &[Vec<usize>], cycles: &[Vec<usize>]) -> bool {
    let mut seen = HashSet::new();
    paths
        .iter()
        .chain(cycles)
        .flatten()
        .all(|&v| seen.insert(v))
}

/// All `k`-subsets of `0..n`, in bitmask order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1u32 << n))
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..n).filter(|&v| s >> v & 1 == 1).collect())
        .collect()
}
