//! Simpson rules, used for energies on simulation grids and as independent
//! oracles for the closed-form integrals.

use nalgebra::DMatrix;

/// Composite Simpson over equally spaced samples. `samples.len()` must be odd
/// and at least 3; with an even count the last interval falls back to the
/// trapezoid rule.
pub fn composite_simpson(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        len => {
            let pairs_end = if len % 2 == 1 { len } else { len - 1 };
            let mut acc = samples[0] + samples[pairs_end - 1];
            for (i, s) in samples[1..pairs_end - 1].iter().enumerate() {
                acc += if i % 2 == 0 { 4.0 * s } else { 2.0 * s };
            }
            let mut total = acc * h / 3.0;
            if pairs_end != len {
                total += 0.5 * h * (samples[len - 2] + samples[len - 1]);
            }
            total
        }
    }
}

/// Adaptive Simpson for matrix-valued integrands, refining until each panel
/// meets `rel_tol` relative to the Frobenius norm of the coarse whole-interval
/// estimate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_panel(&fa, &fm, &fb, b - a);
    // Seed the scale from a few interior samples so an integrand that
    // happens to vanish at the panel points still gets a sensible tolerance.
    let scale = [0.25, 0.5, 0.75]
        .iter()
        .map(|s| f(a + s * (b - a)).norm() * (b - a))
        .fold(whole.norm(), f64::max);
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    refine(&f, a, b, &fa, &fm, &fb, whole, tol, 50)
}

fn simpson_panel(fa: &DMatrix<f64>, fm: &DMatrix<f64>, fb: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    (fa + fm * 4.0 + fb) * (h / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: &DMatrix<f64>,
    fm: &DMatrix<f64>,
    fb: &DMatrix<f64>,
    whole: DMatrix<f64>,
    tol: f64,
    depth: u32,
) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(fa, &flm, fm, m - a);
    let right = simpson_panel(fm, &frm, fb, b - m);
    let both = &left + &right;
    let err = (&both - &whole).norm();
    if depth == 0 || err <= 15.0 * tol {
        // Richardson correction.
        return &both + (&both - &whole) / 15.0;
    }
    refine(f, a, m, fa, &flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, &frm, fb, right, 0.5 * tol, depth - 1)
}
