//! Dense LTI machinery for `x' = Ax + Bu`, `y = Cx`: exponentials, the
//! controllability Gramian, output controllability, minimum-energy cost and
//! input, and RK4 simulation.

pub mod quadrature;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible condition number of `C W Cᵀ`.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative singular-value cutoff for numeric rank.
pub const RANK_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_STEPS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("selected outputs are not controllable")]
    Uncontrollable,
    #[error("C W Cᵀ is ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("input column {0} is identically zero")]
    ZeroColumn(usize),
}

fn ensure_square(a: &DMatrix<f64>) -> Result<usize, LtiError> {
    if a.is_square() {
        Ok(a.nrows())
    } else {
        Err(LtiError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    }
}

fn ensure_horizon(t_f: f64) -> Result<(), LtiError> {
    if t_f.is_finite() && t_f > 0.0 {
        Ok(())
    } else {
        Err(LtiError::InvalidHorizon(t_f))
    }
}

/// `e^{A t}` by scaling and squaring with a Padé approximant.
pub fn mat_exp(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, LtiError> {
    ensure_square(a)?;
    Ok((a * t).exp())
}

/// Van Loan block exponential: the top-right block of
/// `exp([[A, Q], [0, -Aᵀ]] T)` equals `∫₀ᵀ e^{A(T-s)} Q e^{-Aᵀ s} ds`, and
/// right-multiplying by `e^{AᵀT}` gives `∫₀ᵀ e^{As} Q e^{Aᵀs} ds`.
pub(crate) fn van_loan(a: &DMatrix<f64>, q: &DMatrix<f64>, t_f: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(a);
    block.view_mut((0, n), (n, n)).copy_from(q);
    block.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let e = (block * t_f).exp();
    let top_right = e.view((0, n), (n, n)).into_owned();
    let e_at = e.view((0, 0), (n, n)).transpose();
    let w = top_right * e_at;
    (&w + w.transpose()) * 0.5
}

/// Controllability Gramian `∫₀^{t_f} e^{At} B Bᵀ e^{Aᵀt} dt`.
pub fn gramian(a: &DMatrix<f64>, b: &DMatrix<f64>, t_f: f64) -> Result<DMatrix<f64>, LtiError> {
    let n = ensure_square(a)?;
    ensure_horizon(t_f)?;
    if b.nrows() != n {
        return Err(LtiError::DimensionMismatch(format!(
            "B has {} rows, A is {n}x{n}",
            b.nrows()
        )));
    }
    Ok(van_loan(a, &(b * b.transpose()), t_f))
}

/// Orthonormal basis of the reachable subspace `span[B, AB, A²B, ...]`,
/// grown block by block with re-orthogonalized Gram–Schmidt and deflation.
fn krylov_basis(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let a_scale = a.norm().max(1.0);
    let b_scale = b.column_iter().map(|c| c.norm()).fold(0.0, f64::max);

    let admit = |v: DVector<f64>, scale: f64, basis: &mut Vec<DVector<f64>>| {
        let mut r = v;
        for _ in 0..2 {
            for q in basis.iter() {
                let proj = q.dot(&r);
                r.axpy(-proj, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm > 1e-10 * scale {
            basis.push(r / norm);
            true
        } else {
            false
        }
    };

    let mut frontier = Vec::new();
    for col in b.column_iter() {
        if basis.len() < n && admit(col.into_owned(), b_scale, &mut basis) {
            frontier.push(basis.len() - 1);
        }
    }
    while !frontier.is_empty() && basis.len() < n {
        let mut next = Vec::new();
        for &k in &frontier {
            let v = a * &basis[k];
            if basis.len() < n && admit(v, a_scale, &mut basis) {
                next.push(basis.len() - 1);
            }
        }
        frontier = next;
    }
    if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * top).count()
}

/// Output controllability: `rank[CB, CAB, ..., CA^{N-1}B] = rows(C)`.
///
/// The rank is taken of `C V` where `V` is an orthonormal basis of the
/// reachable subspace, which is the same column space without the powers of
/// `A` that swamp small directions.
pub fn output_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n || c.ncols() != n {
        return false;
    }
    let v = krylov_basis(a, b);
    numeric_rank(&(c * v)) == c.nrows()
}

/// Driver nodes (columns of `B`), controlled nodes (rows of `C`) and the
/// horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPlacement {
    pub drivers: Vec<usize>,
    pub controlled: Vec<usize>,
    pub t_f: f64,
}

impl ControlPlacement {
    pub fn new(drivers: Vec<usize>, controlled: Vec<usize>, t_f: f64) -> Result<Self, LtiError> {
        let p = Self {
            drivers,
            controlled,
            t_f,
        };
        p.validate(None)?;
        Ok(p)
    }

    /// Checks duplicates, emptiness, the horizon and, when `n` is given, the
    /// node range.
    pub fn validate(&self, n: Option<usize>) -> Result<(), LtiError> {
        ensure_horizon(self.t_f)?;
        for (name, list) in [("drivers", &self.drivers), ("controlled", &self.controlled)] {
            if list.is_empty() {
                return Err(LtiError::InvalidPlacement(format!("{name} list is empty")));
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(LtiError::InvalidPlacement(format!(
                    "node {} repeated in {name}",
                    w[0]
                )));
            }
            if let (Some(n), Some(&max)) = (n, sorted.last()) {
                if max >= n {
                    return Err(LtiError::InvalidPlacement(format!(
                        "{name} node {max} out of range for {n} nodes"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn b_matrix(&self, n: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(n, self.drivers.len());
        for (m, &v) in self.drivers.iter().enumerate() {
            b[(v, m)] = 1.0;
        }
        b
    }

    pub fn c_matrix(&self, n: usize) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.controlled.len(), n);
        for (r, &v) in self.controlled.iter().enumerate() {
            c[(r, v)] = 1.0;
        }
        c
    }

    pub fn is_output_controllable(&self, a: &DMatrix<f64>) -> Result<bool, LtiError> {
        let n = ensure_square(a)?;
        self.validate(Some(n))?;
        Ok(output_controllable(a, &self.b_matrix(n), &self.c_matrix(n)))
    }
}

/// Every intermediate of the minimum-energy cost for one `(A, B, C, t_f)`.
#[derive(Debug, Clone)]
pub struct CostTerms {
    pub w: DMatrix<f64>,
    /// `(C W Cᵀ)⁻¹`
    pub g_inv: DMatrix<f64>,
    pub exp_tf: DMatrix<f64>,
    /// `e^{At_f} e^{Aᵀt_f}`
    pub x: DMatrix<f64>,
    pub condition: f64,
    pub cost: f64,
}

impl CostTerms {
    pub fn new(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        c: &DMatrix<f64>,
        t_f: f64,
    ) -> Result<Self, LtiError> {
        let n = ensure_square(a)?;
        if c.ncols() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "C has {} columns, A is {n}x{n}",
                c.ncols()
            )));
        }
        let w = gramian(a, b, t_f)?;
        let g = c * &w * c.transpose();
        let g = (&g + g.transpose()) * 0.5;
        let eig = SymmetricEigen::new(g);
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !condition.is_finite() || condition >= CONDITION_LIMIT {
            return Err(LtiError::IllConditioned { condition });
        }
        let inv_vals = eig.eigenvalues.map(|l| 1.0 / l);
        let g_inv =
            &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
        let exp_tf = mat_exp(a, t_f)?;
        let x = &exp_tf * exp_tf.transpose();
        let cost = (&g_inv * c * &x * c.transpose()).trace();
        Ok(Self {
            w,
            g_inv,
            exp_tf,
            x,
            condition,
            cost,
        })
    }
}

/// Expected minimum control energy for unit-variance initial states, on a
/// continuous `(B, C)` pair. Only the conditioning of `C W Cᵀ` is checked.
pub fn cost_from_matrices(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    t_f: f64,
) -> Result<f64, LtiError> {
    Ok(CostTerms::new(a, b, c, t_f)?.cost)
}

/// `tr((C W Cᵀ)⁻¹ C e^{At_f} e^{Aᵀt_f} Cᵀ)` for a validated placement.
pub fn control_cost(a: &DMatrix<f64>, p: &ControlPlacement) -> Result<f64, LtiError> {
    if !p.is_output_controllable(a)? {
        return Err(LtiError::Uncontrollable);
    }
    let n = a.nrows();
    cost_from_matrices(a, &p.b_matrix(n), &p.c_matrix(n), p.t_f)
}

/// Minimum-energy input steering `C x(t_f)` to zero from a given `x0`.
#[derive(Debug, Clone)]
pub struct OptimalInput {
    a_t: DMatrix<f64>,
    b_t: DMatrix<f64>,
    /// `Cᵀ (C W Cᵀ)⁻¹ C e^{At_f} x0`
    costate: DVector<f64>,
    t_f: f64,
    /// `x0ᵀ e^{Aᵀt_f} Cᵀ (C W Cᵀ)⁻¹ C e^{At_f} x0`
    pub energy: f64,
}

impl OptimalInput {
    pub fn new(
        a: &DMatrix<f64>,
        p: &ControlPlacement,
        x0: &DVector<f64>,
    ) -> Result<Self, LtiError> {
        if !p.is_output_controllable(a)? {
            return Err(LtiError::Uncontrollable);
        }
        let n = a.nrows();
        if x0.len() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "x0 has length {}, expected {n}",
                x0.len()
            )));
        }
        let b = p.b_matrix(n);
        let c = p.c_matrix(n);
        let terms = CostTerms::new(a, &b, &c, p.t_f)?;
        let y_f = &c * &terms.exp_tf * x0;
        let costate = c.transpose() * (&terms.g_inv * &y_f);
        let energy = y_f.dot(&(&terms.g_inv * &y_f));
        Ok(Self {
            a_t: a.transpose(),
            b_t: b.transpose(),
            costate,
            t_f: p.t_f,
            energy,
        })
    }

    pub fn at(&self, t: f64) -> DVector<f64> {
        let e = (&self.a_t * (self.t_f - t)).exp();
        -(&self.b_t * (e * &self.costate))
    }
}

/// `u(t) = -Bᵀ e^{Aᵀ(t_f - t)} Cᵀ (C W Cᵀ)⁻¹ C e^{At_f} x0`.
pub fn optimal_input(
    a: &DMatrix<f64>,
    p: &ControlPlacement,
    x0: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>, LtiError> {
    if !(0.0..=p.t_f).contains(&t) {
        return Err(LtiError::InvalidHorizon(t));
    }
    Ok(OptimalInput::new(a, p, x0)?.at(t))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Fixed-step RK4 integration of `x' = Ax + Bu(t)` over `steps` intervals.
pub fn simulate<U>(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u: U,
    x0: &DVector<f64>,
    t_f: f64,
    steps: usize,
) -> Result<Trajectory, LtiError>
where
    U: Fn(f64) -> DVector<f64>,
{
    let n = ensure_square(a)?;
    ensure_horizon(t_f)?;
    if b.nrows() != n || x0.len() != n {
        return Err(LtiError::DimensionMismatch(format!(
            "A is {n}x{n}, B has {} rows, x0 has length {}",
            b.nrows(),
            x0.len()
        )));
    }
    let steps = steps.max(1);
    let h = t_f / steps as f64;
    let rhs = |t: f64, x: &DVector<f64>| a * x + b * u(t);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    times.push(0.0);
    states.push(x.clone());
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        times.push((k + 1) as f64 * h);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// `∫₀^{t_f} uᵀu dt` by composite Simpson on `steps` intervals.
pub fn input_energy<U>(u: U, t_f: f64, steps: usize) -> f64
where
    U: Fn(f64) -> DVector<f64>,
{
    let steps = steps.max(2) / 2 * 2;
    let h = t_f / steps as f64;
    let samples: Vec<f64> = (0..=steps)
        .map(|k| u(k as f64 * h).norm_squared())
        .collect();
    quadrature::composite_simpson(&samples, h)
}

/// Unit-weight directed chain `0 -> 1 -> ... -> len-1` as a state matrix.
pub fn chain_matrix(len: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(len, len);
    for v in 1..len {
        a[(v, v - 1)] = 1.0;
    }
    a
}
