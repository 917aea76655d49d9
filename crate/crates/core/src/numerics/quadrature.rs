//! Integration helpers: trapezoid over a nonuniform grid (the tempering-path
//! integral) and an adaptive Simpson rule used internally by the incomplete
//! gamma difference.

use crate::error::{Error, Result};

/// Trapezoidal rule over a nonuniform, strictly increasing grid.
pub fn integrate_grid(ts: &[f64], fs: &[f64]) -> Result<f64> {
    if ts.len() != fs.len() {
        return Err(Error::Domain(format!(
            "integrate_grid: grid length {} != value length {}",
            ts.len(),
            fs.len()
        )));
    }
    if ts.len() < 2 {
        return Err(Error::Domain("integrate_grid needs at least 2 points".into()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("integrate_grid grid must be strictly increasing".into()));
    }
    Ok(ts
        .windows(2)
        .zip(fs.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum())
}

/// Trapezoid weights for the same grid: `integrate_grid(ts, fs)` equals
/// `Σ w_k f_k`. Used to propagate per-rung Monte-Carlo errors.
pub(crate) fn trapezoid_weights(ts: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (ts[k + 1] - ts[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)] // recursion state, not configuration
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(&|x| f(x), a, b, fa, fm, fb, whole, tol, depth)
}
