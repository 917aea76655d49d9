//! Derivative-free simplex minimization.
//!
//! The profile objective over breakpoints is discontinuous, so gradient
//! methods are out; a plain Nelder-Mead simplex works well here. Objective
//! values that are not finite (NaN, ±∞) are treated as infeasible and ranked
//! worse than every finite value, which lets callers mark empty-segment
//! configurations with a sentinel.

use crate::error::{Error, Result};

/// Coefficients and stopping rules for [`nelder_mead`].
#[derive(Debug, Clone)]
pub struct SimplexConfig {
    /// Reflection coefficient, > 0.
    pub reflection: f64,
    /// Expansion coefficient, > 1.
    pub expansion: f64,
    /// Contraction coefficient, in (0, 1).
    pub contraction: f64,
    /// Shrink coefficient, in (0, 1).
    pub shrink: f64,
    pub max_iters: usize,
    /// Stop when the simplex diameter (max coordinate spread) falls below this.
    pub x_tol: f64,
    /// Stop when the spread of finite vertex values falls below this.
    /// Disabled for practical purposes by default: vertices straddling an
    /// optimum symmetrically can have near-equal values while the simplex is
    /// still wide, so value flatness alone is a poor default stopping rule.
    pub f_tol: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_iters: 500,
            x_tol: 1e-10,
            f_tol: 1e-300,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.x_tol > 0.0
            && self.f_tol > 0.0
            && self.max_iters >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("simplex configuration out of range".into()))
        }
    }
}

/// Rank non-finite objective values (sentinels) below everything finite.
#[inline]
fn score(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimize `f` starting from `x0`. Returns the best vertex and its value.
/// Deterministic given `x0` and `cfg`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &SimplexConfig) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("nelder_mead requires a finite, nonempty start".into()));
    }
    let dim = x0.len();

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        let h = (0.05 * v[i].abs()).clamp(0.1, 1.0);
        v[i] += h;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| score(f(v))).collect();

    for _ in 0..cfg.max_iters {
        // order: best first
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder_v: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_f: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder_v;
        values = reorder_f;

        let diameter = (0..dim)
            .map(|c| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for v in &simplex {
                    lo = lo.min(v[c]);
                    hi = hi.max(v[c]);
                }
                hi - lo
            })
            .fold(0.0f64, f64::max);
        let spread = if values[dim].is_finite() {
            values[dim] - values[0]
        } else {
            f64::INFINITY
        };
        if diameter < cfg.x_tol || spread < cfg.f_tol {
            break;
        }

        // centroid of all but worst
        let centroid: Vec<f64> = (0..dim)
            .map(|c| simplex[..dim].iter().map(|v| v[c]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let lerp = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };

        // reflect
        let xr = lerp(&centroid, &worst, -cfg.reflection);
        let fr = score(f(&xr));
        if fr < values[0] {
            // expand
            let xe = lerp(&centroid, &worst, -cfg.reflection * cfg.expansion);
            let fe = score(f(&xe));
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        // contract (outside if the reflection improved on the worst)
        let (xc, fc) = if fr < values[dim] {
            let x = lerp(&centroid, &xr, cfg.contraction);
            let v = score(f(&x));
            (x, v)
        } else {
            let x = lerp(&centroid, &worst, cfg.contraction);
            let v = score(f(&x));
            (x, v)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        // shrink toward best
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = lerp(&best, &simplex[i], cfg.shrink);
            values[i] = score(f(&simplex[i]));
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok((simplex[best].clone(), values[best]))
}
