//! Exact control cost of a unit-weight string driven from its head with
//! every node controlled.
//!
//! For a chain of length `L` the Gramian factors as `W = t·D·H·D` with
//! `D = diag(t^i / i!)` and `H` the `L×L` Hilbert matrix, whose inverse has
//! integer entries. Substituting into `tr(W⁻¹ e^{At} e^{Aᵀt})` gives
//! `E(t) = Σ_k c_k t^{-(2k+1)}` with
//! `c_k = Σ_{i,j≥k} (H⁻¹)_ij (i)_k (j)_k` (falling factorials), all
//! positive. The `c_k` are computed exactly once per length, so lengths far
//! past the floating-point conditioning limit still get accurate costs.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::EdcpError;

/// Strings longer than this are priced at `+inf`.
pub const MAX_EXACT_LENGTH: usize = 128;

fn ln_big(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().map_or(f64::INFINITY, f64::ln)
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().map_or(f64::INFINITY, f64::ln) + shift as f64 * LN_2
    }
}

fn pascal(rows: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(rows + 1);
    for a in 0..=rows {
        let mut row = vec![BigUint::one(); a + 1];
        for b in 1..a {
            row[b] = &table[a - 1][b - 1] + &table[a - 1][b];
        }
        table.push(row);
    }
    table
}

/// `c_k` for `k = 0..len`, as `(ln c_k, c_k)` with the second possibly
/// overflowing to `+inf`.
fn coefficients(len: usize) -> Vec<(f64, f64)> {
    let c = pascal(2 * len);
    let binom = |a: usize, b: usize| -> BigInt { BigInt::from(c[a][b].clone()) };
    // Entries of the inverse Hilbert matrix.
    let hinv: Vec<Vec<BigInt>> = (0..len)
        .map(|i| {
            (0..len)
                .map(|j| {
                    let mid = binom(i + j, i);
                    let v = BigInt::from(i + j + 1)
                        * binom(len + i, len - j - 1)
                        * binom(len + j, len - i - 1)
                        * &mid
                        * &mid;
                    if (i + j) % 2 == 1 {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    (0..len)
        .map(|k| {
            // Falling factorial (i)_k, zero for i < k.
            let p: Vec<BigInt> = (0..len)
                .map(|i| {
                    if i < k {
                        BigInt::zero()
                    } else {
                        ((i - k + 1)..=i).fold(BigInt::one(), |acc, f| acc * f)
                    }
                })
                .collect();
            let mut total = BigInt::zero();
            for i in k..len {
                let row: BigInt = (k..len).map(|j| &hinv[i][j] * &p[j]).sum();
                total += row * &p[i];
            }
            (ln_big(&total), total.to_f64().unwrap_or(f64::INFINITY))
        })
        .collect()
}

type Coefficients = Arc<Vec<(f64, f64)>>;

fn cached_coefficients(len: usize) -> Coefficients {
    static CACHE: OnceLock<Mutex<HashMap<usize, Coefficients>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("string cost cache poisoned").get(&len) {
        return Arc::clone(hit);
    }
    let computed = Arc::new(coefficients(len));
    cache
        .lock()
        .expect("string cost cache poisoned")
        .entry(len)
        .or_insert(computed)
        .clone()
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Near-equal split of `q` into `d` positive parts, larger parts first.
pub fn even_split(q: usize, d: usize) -> Vec<usize> {
    let (base, extra) = (q / d, q % d);
    (0..d).map(|i| base + usize::from(i < extra)).collect()
}

/// Single-driver cost of a `len`-node string as `(ln E, E)`. The direct
/// sum is used whenever it stays finite; the log is then taken of it.
fn chain_cost_pair(len: usize, t_f: f64) -> (f64, f64) {
    match len {
        0 => (f64::NEG_INFINITY, 0.0),
        l if l > MAX_EXACT_LENGTH => (f64::INFINITY, f64::INFINITY),
        l => {
            let coeffs = cached_coefficients(l);
            let direct: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &(_, c))| c * t_f.powi(-(2 * k as i32 + 1)))
                .sum();
            if direct.is_finite() {
                return (direct.ln(), direct);
            }
            let ln_t = t_f.ln();
            let ln = log_sum_exp(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &(c, _))| c - (2 * k + 1) as f64 * ln_t),
            );
            (ln, ln.exp())
        }
    }
}

/// Natural log of the single-driver cost of a `len`-node string.
pub fn chain_cost_ln(len: usize, t_f: f64) -> f64 {
    chain_cost_pair(len, t_f).0
}

pub fn chain_cost(len: usize, t_f: f64) -> f64 {
    chain_cost_pair(len, t_f).1
}

fn check_split(q: usize, d: usize, t_f: f64) -> Result<(), EdcpError> {
    if d == 0 || d > q {
        return Err(EdcpError::InvalidSplit { q, d });
    }
    if !(t_f.is_finite() && t_f > 0.0) {
        return Err(EdcpError::InvalidHorizon(t_f));
    }
    Ok(())
}

/// `ln ℰ(q, d)`.
pub fn string_cost_ln(q: usize, d: usize, t_f: f64) -> Result<f64, EdcpError> {
    check_split(q, d, t_f)?;
    Ok(log_sum_exp(
        even_split(q, d).into_iter().map(|s| chain_cost_ln(s, t_f)),
    ))
}

/// `ℰ(q, d)`: cost of `d` drivers evenly splitting a `q`-node string.
pub fn string_cost(q: usize, d: usize, t_f: f64) -> Result<f64, EdcpError> {
    check_split(q, d, t_f)?;
    Ok(even_split(q, d)
        .into_iter()
        .map(|s| chain_cost(s, t_f))
        .sum())
}
