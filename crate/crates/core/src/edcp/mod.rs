//! Even-division control placement: merge free cycles into stems, cut the
//! stems into near-equal control segments, and trim to the requested number
//! of drivers and controlled nodes.

mod strings;

pub use strings::{
    chain_cost, chain_cost_ln, even_split, string_cost, string_cost_ln, MAX_EXACT_LENGTH,
};

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{driver_count, DirectedGraph, Edge};
use crate::lti::{control_cost, ControlPlacement, LtiError};
use crate::mcfp::{max_controllable_subset, min_controllers_for, McfpError, PathCover};
use strings::log_sum_exp;

/// Graphs up to this size also get the exact dense cost.
pub const EXACT_COST_MAX_NODES: usize = 400;
/// Relabeled copies of the graph whose placements are tried as alternatives.
const ALTERNATIVE_COVERS: u64 = 8;
/// An alternative replaces a controllable canonical placement only when it
/// is at least this many times cheaper.
const ALTERNATIVE_GAIN: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdcpError {
    #[error("cannot split {q} nodes among {d} drivers")]
    InvalidSplit { q: usize, d: usize },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("need 1 <= M <= |R| <= n, got M = {m}, |R| = {r}, n = {n}")]
    InvalidSizes { m: usize, r: usize, n: usize },
    #[error("only {covered} nodes are controllable, {r} requested")]
    InsufficientCover { covered: usize, r: usize },
    #[error("{needed} drivers are unavoidable but only {m} are allowed")]
    TooFewControllers { needed: usize, m: usize },
    #[error(transparent)]
    Mcfp(#[from] McfpError),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// A control segment: `len` consecutive stem nodes from `start`, driven at
/// `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemState {
    pub nodes: Vec<usize>,
    /// Positions where a merged cycle and the rest of the stem meet. No
    /// graph edge crosses them, so no segment may either.
    pub junctions: Vec<usize>,
    /// Start of the undivided suffix.
    pub undivided_from: usize,
    pub segments: Vec<Segment>,
    /// Assignment stamp of the newest driver on this stem (0 = none).
    pub last_placed: usize,
    /// Empty host created because the cover had cycles but no stems.
    pub synthetic: bool,
}

impl StemState {
    pub fn from_path(nodes: Vec<usize>) -> Self {
        Self {
            nodes,
            junctions: Vec::new(),
            undivided_from: 0,
            segments: Vec::new(),
            last_placed: 0,
            synthetic: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn undivided_len(&self) -> usize {
        self.len() - self.undivided_from
    }

    pub fn drivers(&self) -> usize {
        self.segments.len()
    }

    pub fn covered(&self) -> usize {
        self.segments.iter().map(|s| s.len).sum()
    }

    fn block_end(&self, pos: usize) -> usize {
        self.junctions
            .iter()
            .copied()
            .find(|&j| j > pos)
            .unwrap_or(self.len())
    }

    /// Junction-delimited blocks of the divided prefix, as `(start, len)`.
    fn covered_blocks(&self) -> Vec<(usize, usize)> {
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < self.undivided_from {
            let end = self.block_end(start).min(self.undivided_from);
            blocks.push((start, end - start));
            start = end;
        }
        blocks
    }

    /// Lays `d` drivers over the divided prefix per [`spread`].
    fn respread(&mut self, d: usize, t_f: f64) {
        let blocks = self.covered_blocks();
        let (_, per_block) = spread(&blocks, d, t_f).expect("caller checked feasibility");
        self.segments.clear();
        for (&(start, len), &k) in blocks.iter().zip(&per_block) {
            let mut at = start;
            for part in even_split(len, k) {
                self.segments.push(Segment {
                    start: at,
                    len: part,
                });
                at += part;
            }
        }
    }

    pub fn segment_nodes(&self, s: &Segment) -> &[usize] {
        &self.nodes[s.start..s.start + s.len]
    }
}

/// Cheapest way found to put `d` drivers on junction-delimited blocks: one
/// per block, then each extra driver where it cuts the most cost (ties to
/// the earlier block); each block is split evenly. Returns `ln` of the cost
/// and the per-block driver counts, or `None` if `d` cannot fit.
fn spread(blocks: &[(usize, usize)], d: usize, t_f: f64) -> Option<(f64, Vec<usize>)> {
    let capacity: usize = blocks.iter().map(|b| b.1).sum();
    if d < blocks.len() || d > capacity {
        return None;
    }
    let mut per_block = vec![1usize; blocks.len()];
    let cost = |len: usize, k: usize| string_cost_ln(len, k, t_f).expect("valid split");
    for _ in blocks.len()..d {
        let mut best: Option<(f64, usize)> = None;
        for (i, &(_, len)) in blocks.iter().enumerate() {
            if per_block[i] == len {
                continue;
            }
            let gain = ln_diff(cost(len, per_block[i]), cost(len, per_block[i] + 1));
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        let (_, i) = best?;
        per_block[i] += 1;
    }
    let total = log_sum_exp(
        blocks
            .iter()
            .zip(&per_block)
            .map(|(&(_, len), &k)| cost(len, k)),
    );
    Some((total, per_block))
}

/// `ln(e^hi - e^lo)` for `hi >= lo`; `+inf` when `hi` is infinite.
fn ln_diff(hi: f64, lo: f64) -> f64 {
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if lo >= hi {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp()).ln_1p()
}

fn same_ln(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12
}

/// Breaks each cycle (longest first, starting at its lowest node) and
/// places it in front of the currently shortest stem (ties to the lowest
/// index), recording the junction between them. A cover with cycles but no
/// stems gets a synthetic empty host stem.
pub fn merge_cycles(cover: &PathCover) -> Vec<StemState> {
    let mut stems: Vec<StemState> = cover
        .paths
        .iter()
        .cloned()
        .map(StemState::from_path)
        .collect();
    let mut cycles: Vec<Vec<usize>> = cover
        .cycles
        .iter()
        .map(|c| {
            let low = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
            let mut c = c.clone();
            c.rotate_left(low);
            c
        })
        .collect();
    cycles.sort_by_key(|c| std::cmp::Reverse(c.len()));
    if stems.is_empty() && !cycles.is_empty() {
        let mut host = StemState::from_path(Vec::new());
        host.synthetic = true;
        stems.push(host);
    }
    for cycle in cycles {
        let k = (0..stems.len())
            .min_by_key(|&k| stems[k].len())
            .expect("at least one stem");
        let stem = &mut stems[k];
        let shift = cycle.len();
        let mut junctions = Vec::with_capacity(stem.junctions.len() + 1);
        if !stem.is_empty() {
            junctions.push(shift);
        }
        junctions.extend(stem.junctions.iter().map(|j| j + shift));
        let mut nodes = cycle;
        nodes.extend_from_slice(&stem.nodes);
        stem.nodes = nodes;
        stem.junctions = junctions;
    }
    stems
}

/// Opens cycles into stems wherever a real edge allows it, so no junction is
/// needed: an edge from a stem's tail into cycle node `c_i` appends the
/// cycle read from `c_i`, and an edge from `c_i` to a stem's head prepends
/// the cycle read so that it ends at `c_i`. Cycles are tried longest first
/// (ties to the lowest node), stems in index order, tails before heads, and
/// the scan repeats until nothing changes. Cycles without such an edge are
/// kept.
pub fn splice_cycles(g: &DirectedGraph, cover: &PathCover) -> PathCover {
    let mut paths = cover.paths.clone();
    let mut cycles = cover.cycles.clone();
    cycles.sort_by_key(|c| (std::cmp::Reverse(c.len()), c.iter().min().copied()));
    loop {
        let mut spliced = None;
        'search: for (ci, cycle) in cycles.iter().enumerate() {
            for (pi, path) in paths.iter().enumerate() {
                let (head, tail) = (path[0], path[path.len() - 1]);
                if let Some(i) = (0..cycle.len()).find(|&i| g.has_edge(tail, cycle[i])) {
                    let mut opened = cycle.clone();
                    opened.rotate_left(i);
                    spliced = Some((ci, pi, opened, false));
                    break 'search;
                }
                if let Some(i) = (0..cycle.len()).find(|&i| g.has_edge(cycle[i], head)) {
                    let mut opened = cycle.clone();
                    opened.rotate_left((i + 1) % cycle.len());
                    spliced = Some((ci, pi, opened, true));
                    break 'search;
                }
            }
        }
        let Some((ci, pi, opened, before)) = spliced else {
            break;
        };
        cycles.remove(ci);
        let path = &mut paths[pi];
        if before {
            let mut nodes = opened;
            nodes.extend_from_slice(path);
            *path = nodes;
        } else {
            path.extend(opened);
        }
    }
    PathCover::new(paths, cycles)
}

/// Near-equal split of `|R|` into `M` parts, larger parts first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionPlan {
    pub parts: Vec<usize>,
}

pub fn even_division(r_size: usize, m: usize) -> Result<DivisionPlan, EdcpError> {
    if m == 0 || m > r_size {
        return Err(EdcpError::InvalidSplit { q: r_size, d: m });
    }
    Ok(DivisionPlan {
        parts: even_split(r_size, m),
    })
}

fn longest_undivided(stems: &[StemState]) -> Option<usize> {
    let k = (0..stems.len())
        .rev()
        .max_by_key(|&k| stems[k].undivided_len())?;
    (stems[k].undivided_len() > 0).then_some(k)
}

/// Places one driver per planned part at the head of the longest undivided
/// suffix, consuming up to that many nodes without crossing a junction, then
/// keeps claiming whole blocks until at least `r_size` nodes are covered.
pub fn assign_drivers(
    stems: &mut [StemState],
    plan: &DivisionPlan,
    r_size: usize,
) -> Result<(), EdcpError> {
    let total: usize = stems.iter().map(StemState::len).sum();
    let insufficient = EdcpError::InsufficientCover {
        covered: total,
        r: r_size,
    };
    let mut stamp = stems.iter().map(|s| s.last_placed).max().unwrap_or(0);
    let mut nc: usize = stems.iter().map(StemState::covered).sum();
    let mut place = |stems: &mut [StemState], want: Option<usize>| -> Result<usize, EdcpError> {
        let k = longest_undivided(stems).ok_or(insufficient.clone())?;
        let stem = &mut stems[k];
        let start = stem.undivided_from;
        let room = stem.block_end(start) - start;
        let len = want.map_or(room, |q| q.min(room));
        stem.segments.push(Segment { start, len });
        stem.undivided_from += len;
        stamp += 1;
        stem.last_placed = stamp;
        Ok(len)
    };
    for &q in &plan.parts {
        nc += place(stems, Some(q))?;
    }
    while nc < r_size {
        nc += place(stems, None)?;
    }
    Ok(())
}

/// Removes drivers until `m` remain. Each round drops one driver from the
/// stem whose cost rises least when its drivers are re-spread (ties to the
/// stem that received a driver most recently). When every stem is down to
/// one driver per block, a stem instead gives up its last block, provided
/// at least `r_size` nodes stay covered.
pub fn reduce_drivers(
    stems: &mut [StemState],
    m: usize,
    r_size: usize,
    t_f: f64,
) -> Result<(), EdcpError> {
    loop {
        let drivers: usize = stems.iter().map(StemState::drivers).sum();
        if drivers <= m {
            return Ok(());
        }
        let better = |cand: (f64, usize), best: Option<(f64, usize, usize)>| match best {
            None => true,
            Some((delta, stamp, _)) => {
                if same_ln(cand.0, delta) {
                    cand.1 > stamp
                } else {
                    cand.0 < delta
                }
            }
        };

        let mut best: Option<(f64, usize, usize)> = None;
        for (k, stem) in stems.iter().enumerate() {
            let blocks = stem.covered_blocks();
            let d = stem.drivers();
            if d < 2 || d - 1 < blocks.len() {
                continue;
            }
            let (Some((now, _)), Some((after, _))) =
                (spread(&blocks, d, t_f), spread(&blocks, d - 1, t_f))
            else {
                continue;
            };
            let delta = ln_diff(after, now);
            if better((delta, stem.last_placed), best) {
                best = Some((delta, stem.last_placed, k));
            }
        }
        if let Some((_, _, k)) = best {
            let d = stems[k].drivers();
            stems[k].respread(d - 1, t_f);
            continue;
        }

        // Release a whole trailing block. Rank by the cost saved, larger
        // savings first (stored negated so smaller is better).
        let nc: usize = stems.iter().map(StemState::covered).sum();
        for (k, stem) in stems.iter().enumerate() {
            let blocks = stem.covered_blocks();
            let Some(&(_, last_len)) = blocks.last() else {
                continue;
            };
            if nc - last_len < r_size {
                continue;
            }
            let d = stem.drivers();
            let now = spread(&blocks, d, t_f).map_or(f64::INFINITY, |s| s.0);
            let after =
                spread(&blocks[..blocks.len() - 1], d - 1, t_f).map_or(f64::NEG_INFINITY, |s| s.0);
            let saving = ln_diff(now, after);
            if better((-saving, stem.last_placed), best) {
                best = Some((-saving, stem.last_placed, k));
            }
        }
        let Some((_, _, k)) = best else {
            return Err(EdcpError::TooFewControllers { needed: drivers, m });
        };
        let stem = &mut stems[k];
        let blocks = stem.covered_blocks();
        let d = stem.drivers();
        stem.undivided_from = blocks.last().expect("nonempty").0;
        if d > 1 {
            stem.respread(d - 1, t_f);
        } else {
            stem.segments.clear();
        }
    }
}

/// Drops the tail node of the longest segment (ties to the lowest driver
/// node) until exactly `r_size` nodes are covered.
pub fn trim_to_r(stems: &mut [StemState], r_size: usize) {
    let mut nc: usize = stems.iter().map(StemState::covered).sum();
    while nc > r_size {
        let mut best: Option<(usize, usize, usize, usize)> = None;
        for (k, stem) in stems.iter().enumerate() {
            for (i, s) in stem.segments.iter().enumerate() {
                let head = stem.nodes[s.start];
                let wins = match best {
                    None => true,
                    Some((len, h, _, _)) => s.len > len || (s.len == len && head < h),
                };
                if wins {
                    best = Some((s.len, head, k, i));
                }
            }
        }
        let Some((_, _, k, i)) = best else { return };
        stems[k].segments[i].len -= 1;
        nc -= 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdcpResult {
    pub placement: ControlPlacement,
    /// Control segments in internal ids, each headed by its driver.
    pub segments: Vec<Vec<usize>>,
    pub e_estimate: f64,
    /// Dense cost on the graph's own weights, when `n` is small enough and
    /// the evaluation succeeds.
    pub e_exact: Option<f64>,
    pub synthetic_host: bool,
}

fn check_sizes(g: &DirectedGraph, m: usize, r_size: usize, t_f: f64) -> Result<(), EdcpError> {
    let n = g.node_count();
    if m == 0 || m > r_size || r_size > n {
        return Err(EdcpError::InvalidSizes { m, r: r_size, n });
    }
    if !(t_f.is_finite() && t_f > 0.0) {
        return Err(EdcpError::InvalidHorizon(t_f));
    }
    Ok(())
}

/// Cover used to seed placement: the full minimum cover when `m` drivers
/// suffice for the whole graph, otherwise the best `m`-path cover.
pub fn seed_cover(g: &DirectedGraph, m: usize, r_size: usize) -> Result<PathCover, EdcpError> {
    let n = g.node_count();
    if driver_count(g) <= m {
        return Ok(min_controllers_for(g, n)?.1);
    }
    let (cover, rmax) = max_controllable_subset(g, m)?;
    if rmax < r_size {
        return Err(EdcpError::InsufficientCover {
            covered: rmax,
            r: r_size,
        });
    }
    Ok(cover)
}

fn finish(
    g: &DirectedGraph,
    segments: Vec<Vec<usize>>,
    extra_drivers: Vec<usize>,
    t_f: f64,
    synthetic_host: bool,
) -> Result<EdcpResult, EdcpError> {
    let mut drivers: Vec<usize> = segments.iter().map(|s| s[0]).collect();
    drivers.extend(extra_drivers);
    let controlled: Vec<usize> = segments.iter().flatten().copied().collect();
    let placement = ControlPlacement::new(drivers, controlled, t_f)?;
    let e_estimate = segments.iter().map(|s| chain_cost(s.len(), t_f)).sum();
    let e_exact = if g.node_count() <= EXACT_COST_MAX_NODES {
        match control_cost(&g.adjacency_matrix(), &placement) {
            Ok(e) => Some(e),
            Err(err) => {
                warn!("exact cost unavailable: {err}");
                None
            }
        }
    } else {
        None
    };
    Ok(EdcpResult {
        placement,
        segments,
        e_estimate,
        e_exact,
        synthetic_host,
    })
}

/// Full placement pipeline for `m` drivers controlling `r_size` nodes.
///
/// On graphs small enough for exact costs, placements from relabeled copies
/// and from stems without their cycles are also evaluated. One of them
/// replaces the canonical placement only if the canonical one fails or
/// costs at least twice as much.
pub fn edcp(g: &DirectedGraph, m: usize, r_size: usize, t_f: f64) -> Result<EdcpResult, EdcpError> {
    check_sizes(g, m, r_size, t_f)?;
    let cover = seed_cover(g, m, r_size)?;
    let canonical = place_with_splicing(g, &cover, m, r_size, t_f);
    if g.node_count() > EXACT_COST_MAX_NODES {
        return canonical;
    }
    let bar = match &canonical {
        Ok(c) => c.e_exact.map_or(f64::INFINITY, |e| e / ALTERNATIVE_GAIN),
        Err(_) => f64::INFINITY,
    };
    let mut best = canonical;
    let mut best_alt = bar;
    let consider = |best: &mut Result<EdcpResult, EdcpError>,
                    best_alt: &mut f64,
                    candidate: Result<EdcpResult, EdcpError>| {
        let Ok(c) = candidate else { return };
        let Some(e) = c.e_exact else { return };
        if e < *best_alt || (best_alt.is_infinite() && best.is_err()) {
            *best_alt = e;
            *best = Ok(c);
        }
    };
    for segments in alternative_segments(g, m, r_size, t_f) {
        consider(
            &mut best,
            &mut best_alt,
            finish(g, segments, Vec::new(), t_f, false),
        );
    }
    if best.as_ref().is_ok_and(|b| b.e_exact.is_some()) {
        return best;
    }
    // Every maximum cover failed; covers that leave one node out avoid the
    // junction or the cancelling edge that caused it.
    let n = g.node_count();
    for v in 0..n {
        let id = |u: usize| if u > v { u - 1 } else { u };
        let edges = g
            .edges()
            .iter()
            .filter(|e| e.src != v && e.dst != v)
            .map(|e| Edge::new(id(e.src), id(e.dst), e.weight));
        let Ok(h) = DirectedGraph::new(n - 1, edges) else {
            continue;
        };
        if check_sizes(&h, m, r_size, t_f).is_err() {
            continue;
        }
        let Ok(cover) = seed_cover(&h, m, r_size) else {
            continue;
        };
        if let Ok(r) = place_with_splicing(&h, &cover, m, r_size, t_f) {
            let segments = r
                .segments
                .iter()
                .map(|s| s.iter().map(|&u| if u >= v { u + 1 } else { u }).collect())
                .collect();
            consider(
                &mut best,
                &mut best_alt,
                finish(g, segments, Vec::new(), t_f, false),
            );
        }
    }
    best
}

/// Placements computed on randomly relabeled copies of `g`, as segments in
/// the original ids. Flow solver and tie rules follow node order, so a
/// relabeling can surface other covers and other tie outcomes.
fn alternative_segments(
    g: &DirectedGraph,
    m: usize,
    r_size: usize,
    t_f: f64,
) -> Vec<Vec<Vec<usize>>> {
    let n = g.node_count();
    let mut found: Vec<Vec<Vec<usize>>> = Vec::new();
    for k in 0..ALTERNATIVE_COVERS {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(k));
        let mut inverse = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let edges = g
            .edges()
            .iter()
            .map(|e| Edge::new(perm[e.src], perm[e.dst], e.weight));
        let Ok(h) = DirectedGraph::new(n, edges) else {
            continue;
        };
        let Ok(cover) = seed_cover(&h, m, r_size) else {
            continue;
        };
        let spliced = splice_cycles(&h, &cover);
        let mut tries = vec![place_on_cover(&h, &cover, m, r_size, t_f)];
        if spliced != cover {
            tries.push(place_on_cover(&h, &spliced, m, r_size, t_f));
        }
        // Cycles only add junctions when the stems already reach `r_size`.
        let stems_only = PathCover::new(cover.paths.clone(), Vec::new());
        if !cover.cycles.is_empty()
            && stems_only.paths.iter().map(Vec::len).sum::<usize>() >= r_size
        {
            tries.push(place_on_cover(&h, &stems_only, m, r_size, t_f));
        }
        for r in tries.into_iter().flatten() {
            let segments: Vec<Vec<usize>> = r
                .segments
                .iter()
                .map(|s| s.iter().map(|&v| inverse[v]).collect())
                .collect();
            if !found.contains(&segments) {
                found.push(segments);
            }
        }
    }
    found
}

/// Junction-based placement, retried on a spliced cover when the junctions
/// demand more than `m` drivers.
fn place_with_splicing(
    g: &DirectedGraph,
    cover: &PathCover,
    m: usize,
    r_size: usize,
    t_f: f64,
) -> Result<EdcpResult, EdcpError> {
    match place_on_cover(g, cover, m, r_size, t_f) {
        Err(EdcpError::TooFewControllers { .. }) if !cover.cycles.is_empty() => {
            let spliced = splice_cycles(g, cover);
            if spliced.cycles.len() == cover.cycles.len() {
                return place_on_cover(g, cover, m, r_size, t_f);
            }
            warn!(
                "junctions need more than {m} drivers; opened {} cycles along real edges",
                cover.cycles.len() - spliced.cycles.len()
            );
            place_on_cover(g, &spliced, m, r_size, t_f)
        }
        other => other,
    }
}

fn place_on_cover(
    g: &DirectedGraph,
    cover: &PathCover,
    m: usize,
    r_size: usize,
    t_f: f64,
) -> Result<EdcpResult, EdcpError> {
    let mut stems = merge_cycles(cover);
    let plan = even_division(r_size, m)?;
    assign_drivers(&mut stems, &plan, r_size)?;
    reduce_drivers(&mut stems, m, r_size, t_f)?;
    trim_to_r(&mut stems, r_size);

    let synthetic_host = stems.iter().any(|s| s.synthetic);
    if synthetic_host {
        warn!("cover had cycles but no stems; hosted them on a synthetic stem");
    }
    let segments: Vec<Vec<usize>> = stems
        .iter()
        .flat_map(|stem| {
            stem.segments
                .iter()
                .filter(|s| s.len > 0)
                .map(|s| stem.segment_nodes(s).to_vec())
        })
        .collect();
    finish(g, segments, Vec::new(), t_f, synthetic_host)
}

/// Baseline without even division: stems and broken cycles are used whole,
/// longest first, each driven at its head, until `r_size` nodes are covered.
/// Leftover drivers go to uncontrolled nodes, lowest index first.
pub fn naive_placement(
    g: &DirectedGraph,
    m: usize,
    r_size: usize,
    t_f: f64,
) -> Result<EdcpResult, EdcpError> {
    check_sizes(g, m, r_size, t_f)?;
    let cover = seed_cover(g, m, r_size)?;
    let mut blocks: Vec<Vec<usize>> = cover.paths.clone();
    for c in &cover.cycles {
        let low = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
        let mut c = c.clone();
        c.rotate_left(low);
        blocks.push(c);
    }
    blocks.sort_by_key(|b| std::cmp::Reverse(b.len()));

    let mut segments = Vec::new();
    let mut remaining = r_size;
    for b in blocks {
        if remaining == 0 {
            break;
        }
        let take = b.len().min(remaining);
        segments.push(b[..take].to_vec());
        remaining -= take;
    }
    if segments.len() > m {
        return Err(EdcpError::TooFewControllers {
            needed: segments.len(),
            m,
        });
    }
    let mut is_driver = vec![false; g.node_count()];
    let mut is_controlled = vec![false; g.node_count()];
    for s in &segments {
        is_driver[s[0]] = true;
        for &v in s {
            is_controlled[v] = true;
        }
    }
    let spare = m - segments.len();
    let extra: Vec<usize> = (0..g.node_count())
        .filter(|&v| !is_controlled[v])
        .chain((0..g.node_count()).filter(|&v| is_controlled[v] && !is_driver[v]))
        .take(spare)
        .collect();
    finish(g, segments, extra, t_f, false)
}

/// Placement file contents, in external node ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementReport {
    pub drivers: Vec<u64>,
    pub controlled: Vec<u64>,
    pub segments: Vec<Vec<u64>>,
    #[serde(rename = "E_estimate")]
    pub e_estimate: Option<f64>,
    #[serde(rename = "E_exact")]
    pub e_exact: Option<f64>,
}

impl PlacementReport {
    pub fn new(
        g: &DirectedGraph,
        placement: &ControlPlacement,
        segments: &[Vec<usize>],
        e_estimate: f64,
        e_exact: Option<f64>,
    ) -> Self {
        let ext = |v: &usize| g.external_id(*v);
        Self {
            drivers: placement.drivers.iter().map(ext).collect(),
            controlled: placement.controlled.iter().map(ext).collect(),
            segments: segments
                .iter()
                .map(|s| s.iter().map(ext).collect())
                .collect(),
            e_estimate: e_estimate.is_finite().then_some(e_estimate),
            e_exact: e_exact.filter(|e| e.is_finite()),
        }
    }

    pub fn from_edcp(g: &DirectedGraph, r: &EdcpResult) -> Self {
        Self::new(g, &r.placement, &r.segments, r.e_estimate, r.e_exact)
    }

    /// Maps back to internal ids and validates as a placement on `g`.
    pub fn to_placement(&self, g: &DirectedGraph, t_f: f64) -> Result<ControlPlacement, LtiError> {
        let internal = |ids: &[u64]| -> Result<Vec<usize>, LtiError> {
            ids.iter()
                .map(|&id| {
                    g.internal_id(id).ok_or_else(|| {
                        LtiError::InvalidPlacement(format!("node {id} is not in the graph"))
                    })
                })
                .collect()
        };
        let p = ControlPlacement::new(internal(&self.drivers)?, internal(&self.controlled)?, t_f)?;
        p.validate(Some(g.node_count()))?;
        Ok(p)
    }
}
