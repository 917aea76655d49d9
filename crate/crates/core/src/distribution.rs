//! The B-piece (broken) Pareto distribution: evaluation, sampling, and the
//! complete-data maximum-likelihood machinery used by every E/M step.
//!
//! A `B`-piece Pareto with slopes `β_1..β_B` and breakpoints `τ_1<..<τ_B` has
//! survival function `S_B(x) = 1` below `τ_1` and, on `[τ_j, τ_{j+1})`,
//! `S_B(x) = Π_{k<j} (τ_k/τ_{k+1})^{β_k} (τ_j/x)^{β_j}`. On a log-log plot
//! the survival count is piecewise linear with slope `-β_j`. All evaluation
//! happens in log space: breakpoints sit around 1e-17 in flux units and the
//! naive powers would drain f64 range for nothing.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, SimplexConfig};

/// Slopes and breakpoints of a B-piece Pareto law.
///
/// Invariants, enforced by [`BrokenParetoParams::new`]: equal numbers of
/// slopes and breakpoints (B >= 1), every slope positive, breakpoints
/// strictly increasing and positive, and adjacent slopes distinct (a break
/// with equal slopes on both sides is no break at all).
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenParetoParams {
    beta: Vec<f64>,
    tau: Vec<f64>,
    /// `ln S_B(τ_j)` for j = 1..B, then -inf; cached for evaluation.
    ln_c: Vec<f64>,
}

impl BrokenParetoParams {
    pub fn new(beta: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        if beta.is_empty() || beta.len() != tau.len() {
            return Err(Error::InvalidParams(format!(
                "need equal, nonzero slope/breakpoint counts, got {} and {}",
                beta.len(),
                tau.len()
            )));
        }
        if beta.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(Error::InvalidParams("slopes must be positive and finite".into()));
        }
        if tau.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidParams("breakpoints must be positive and finite".into()));
        }
        if tau.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("breakpoints must be strictly increasing".into()));
        }
        if beta.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("adjacent slopes must be distinct".into()));
        }
        Ok(Self::new_unchecked(beta, tau))
    }

    /// Construct without the parameter-space checks. Optimizer iterates may
    /// transiently violate the adjacent-slope condition, which is fine
    /// numerically; validation applies to user-supplied parameters only.
    pub(crate) fn new_unchecked(beta: Vec<f64>, tau: Vec<f64>) -> Self {
        let b = beta.len();
        let mut ln_c = Vec::with_capacity(b + 1);
        ln_c.push(0.0);
        for j in 0..b - 1 {
            let prev = ln_c[j];
            ln_c.push(prev + beta[j] * (tau[j].ln() - tau[j + 1].ln()));
        }
        ln_c.push(f64::NEG_INFINITY);
        Self { beta, tau, ln_c }
    }

    /// Number of pieces B.
    pub fn pieces(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// `ln S_B(τ_j)` for j = 1..B.
    pub(crate) fn ln_survival_at_breaks(&self) -> &[f64] {
        &self.ln_c[..self.beta.len()]
    }

    /// Index of the piece containing `x` (requires `x >= τ_1`).
    #[inline]
    fn piece_of(&self, x: f64) -> usize {
        // B is small; linear scan beats binary search here
        let mut j = 0;
        while j + 1 < self.tau.len() && x >= self.tau[j + 1] {
            j += 1;
        }
        j
    }

    /// Survival function `S_B(x)`: 1 below `τ_1`, continuous and strictly
    /// decreasing on `[τ_1, ∞)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < self.tau[0] {
            return 1.0;
        }
        let j = self.piece_of(x);
        (self.ln_c[j] + self.beta[j] * (self.tau[j].ln() - x.ln())).exp()
    }

    /// Distribution function `F_B(x) = 1 - S_B(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Density `f_B(x)`; zero below `τ_1`, integrates to one.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.tau[0] {
            return 0.0;
        }
        let j = self.piece_of(x);
        (self.ln_c[j] + self.beta[j].ln() + self.beta[j] * self.tau[j].ln()
            - (self.beta[j] + 1.0) * x.ln())
        .exp()
    }

    /// Exact piecewise inverse of the distribution function.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile requires u in (0,1), got {u}")));
        }
        Ok(self.quantile_survival(1.0 - u))
    }

    /// Inverse on the survival scale, `s in (0, 1]`; `s = 1` maps to `τ_1`.
    #[inline]
    pub(crate) fn quantile_survival(&self, s: f64) -> f64 {
        let ln_s = s.ln();
        let mut j = 0;
        while ln_s <= self.ln_c[j + 1] {
            j += 1;
        }
        (self.tau[j].ln() + (self.ln_c[j] - ln_s) / self.beta[j]).exp()
    }

    /// i.i.d. draws by inverse CDF; deterministic given the RNG state.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen(); // [0, 1)
                self.quantile_survival(1.0 - u)
            })
            .collect()
    }

    /// Indices j where adjacent slopes are within `tol` of each other.
    /// The fitters do not constrain adjacent slopes apart, so estimates may
    /// land near the boundary of the parameter space; this is the diagnostic
    /// for it.
    pub fn near_equal_adjacent_slopes(&self, tol: f64) -> Vec<usize> {
        self.beta
            .windows(2)
            .enumerate()
            .filter(|(_, w)| (w[0] - w[1]).abs() < tol)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Sample sorted ascending with a prefix table of log sums, so per-candidate
/// segment statistics cost O(B log n) instead of O(n).
#[derive(Debug, Clone)]
pub(crate) struct SortedSample {
    pub xs: Vec<f64>,
    /// prefix_log[i] = Σ_{k<i} ln xs[k]
    pub prefix_log: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Data("empty sample".into()));
        }
        if xs.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Data("sample values must be positive and finite".into()));
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prefix_log = Vec::with_capacity(xs.len() + 1);
        prefix_log.push(0.0);
        let mut acc = 0.0;
        for &x in &xs {
            acc += x.ln();
            prefix_log.push(acc);
        }
        Ok(Self { xs, prefix_log })
    }

    #[inline]
    fn count_below(&self, t: f64) -> usize {
        self.xs.partition_point(|&x| x < t)
    }

    fn len(&self) -> usize {
        self.xs.len()
    }
}

/// Per-segment occupancy statistics of a sample against a breakpoint vector:
/// `n_j` counts points at or above `τ_j`, `m_j = n_j - n_{j+1}` counts the
/// points in `A_j = [τ_j, τ_{j+1})`, and `segment_logsums[j]` is
/// `Σ_{i in A_j} ln x_i`. Ties sit in the segment whose lower edge they
/// equal, so counts are deterministic under duplicated values.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCounts {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub segment_logsums: Vec<f64>,
}

impl SegmentCounts {
    pub fn from_sample(xs: &[f64], tau: &[f64]) -> Result<Self> {
        let sorted = SortedSample::new(xs.to_vec())?;
        Ok(Self::from_sorted(&sorted, tau))
    }

    pub(crate) fn from_sorted(sorted: &SortedSample, tau: &[f64]) -> Self {
        let b = tau.len();
        let total = sorted.len();
        let mut cut = Vec::with_capacity(b + 1);
        for &t in tau {
            cut.push(sorted.count_below(t));
        }
        cut.push(total);
        let n: Vec<usize> = cut[..b].iter().map(|&c| total - c).collect();
        let mut m = Vec::with_capacity(b);
        let mut segment_logsums = Vec::with_capacity(b);
        for j in 0..b {
            m.push(cut[j + 1] - cut[j]);
            segment_logsums.push(sorted.prefix_log[cut[j + 1]] - sorted.prefix_log[cut[j]]);
        }
        Self { n, m, segment_logsums }
    }
}

/// Closed-form slope maximizers at fixed breakpoints:
/// `β_j(τ) = m_j / (Σ_{A_j} ln x_i + n_{j+1} ln τ_{j+1} - n_j ln τ_j)`,
/// with the j = B upper term defined as zero. Any empty segment makes the
/// corresponding slope undefined and is reported as an error; callers treat
/// that breakpoint configuration as infeasible.
pub fn beta_given_tau(counts: &SegmentCounts, tau: &[f64]) -> Result<Vec<f64>> {
    let b = tau.len();
    debug_assert_eq!(counts.m.len(), b);
    let mut beta = Vec::with_capacity(b);
    for j in 0..b {
        if counts.m[j] == 0 {
            return Err(Error::Domain(format!("segment {} is empty", j + 1)));
        }
        let upper = if j + 1 < b {
            counts.n[j + 1] as f64 * tau[j + 1].ln()
        } else {
            0.0
        };
        let denom = counts.segment_logsums[j] + upper - counts.n[j] as f64 * tau[j].ln();
        if denom <= 0.0 || denom.is_nan() {
            return Err(Error::Numeric(format!(
                "degenerate slope denominator {denom} in segment {}",
                j + 1
            )));
        }
        beta.push(counts.m[j] as f64 / denom);
    }
    Ok(beta)
}

/// Profile log-likelihood of the complete-data sample at breakpoints `tau`,
/// with slopes profiled out: `-m - Σ ln x_i + Σ_j m_j ln β_j(τ)`.
/// Returns `-inf` for infeasible configurations (a point below `τ_1`, an
/// empty segment, or a degenerate slope).
pub fn profile_loglik(xs: &[f64], tau: &[f64]) -> f64 {
    match SortedSample::new(xs.to_vec()) {
        Ok(sorted) => profile_loglik_sorted(&sorted, tau),
        Err(_) => f64::NEG_INFINITY,
    }
}

pub(crate) fn profile_loglik_sorted(sorted: &SortedSample, tau: &[f64]) -> f64 {
    if tau.is_empty()
        || tau[0] > sorted.xs[0]
        || tau.iter().any(|t| *t <= 0.0 || t.is_nan())
        || tau.windows(2).any(|w| w[1] <= w[0])
    {
        return f64::NEG_INFINITY;
    }
    let counts = SegmentCounts::from_sorted(sorted, tau);
    let beta = match beta_given_tau(&counts, tau) {
        Ok(b) => b,
        Err(_) => return f64::NEG_INFINITY,
    };
    let m = sorted.len() as f64;
    let sum_log = sorted.prefix_log[sorted.len()];
    let fitted: f64 = counts
        .m
        .iter()
        .zip(&beta)
        .map(|(&mj, &bj)| mj as f64 * bj.ln())
        .sum();
    -m - sum_log + fitted
}

/// Multistart quantile levels for the breakpoint search: the empirical
/// quantiles `j/B` plus four deterministic shifts.
const START_OFFSETS: [f64; 5] = [0.0, -0.2, 0.2, -0.35, 0.35];

/// Complete-data MLE of a B-piece Pareto from an i.i.d. flux sample.
///
/// `τ_1` is the sample minimum. The remaining breakpoints maximize the
/// profile log-likelihood by Nelder-Mead over log-gap coordinates
/// `γ_j = ln(τ_{j+1} - τ_j)`, so every simplex point is an increasing
/// breakpoint vector; multistart over shifted empirical quantiles guards
/// against the profile's multimodality. Slopes come from [`beta_given_tau`].
pub fn complete_mle(xs: &[f64], b: usize, cfg: &SimplexConfig) -> Result<BrokenParetoParams> {
    if b < 1 {
        return Err(Error::Domain("need at least one piece".into()));
    }
    let sorted = SortedSample::new(xs.to_vec())?;
    let n = sorted.len();
    if n < 2 * b {
        return Err(Error::FitFailed {
            reason: format!("sample of {n} cannot populate {b} pieces"),
            last_theta: None,
        });
    }
    let tau1 = sorted.xs[0];
    if b == 1 {
        let tau = vec![tau1];
        let counts = SegmentCounts::from_sorted(&sorted, &tau);
        let beta = beta_given_tau(&counts, &tau).map_err(|e| Error::FitFailed {
            reason: format!("degenerate single-piece sample: {e}"),
            last_theta: None,
        })?;
        return Ok(BrokenParetoParams::new_unchecked(beta, tau));
    }

    let tau_from_gaps = |gaps: &[f64]| -> Vec<f64> {
        let mut tau = Vec::with_capacity(b);
        tau.push(tau1);
        for &g in gaps {
            let prev = *tau.last().unwrap();
            tau.push(prev + g.exp());
        }
        tau
    };
    let objective = |gaps: &[f64]| -> f64 { -profile_loglik_sorted(&sorted, &tau_from_gaps(gaps)) };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for &offset in &START_OFFSETS {
        // breakpoint starts at shifted empirical quantiles
        let mut levels: Vec<f64> = (1..b)
            .map(|j| (j as f64 / b as f64 + offset).clamp(0.02, 0.98))
            .collect();
        for j in 1..levels.len() {
            if levels[j] <= levels[j - 1] {
                levels[j] = (levels[j - 1] + 0.01).min(0.99);
            }
        }
        let mut gaps = Vec::with_capacity(b - 1);
        let mut prev = tau1;
        for &l in &levels {
            let idx = ((n - 1) as f64 * l).round() as usize;
            let mut t = sorted.xs[idx.min(n - 1)];
            if t <= prev {
                t = prev * 1.05;
            }
            gaps.push((t - prev).ln());
            prev = t;
        }
        let (gap_hat, fval) = nelder_mead(objective, &gaps, cfg)?;
        if best.as_ref().map_or(true, |(_, f)| fval < *f) {
            best = Some((gap_hat, fval));
        }
    }
    let (gap_hat, fval) = best.unwrap();
    if !fval.is_finite() {
        return Err(Error::FitFailed {
            reason: format!("no feasible {b}-piece breakpoint configuration"),
            last_theta: None,
        });
    }
    let tau = tau_from_gaps(&gap_hat);
    let counts = SegmentCounts::from_sorted(&sorted, &tau);
    let beta = beta_given_tau(&counts, &tau).map_err(|e| Error::FitFailed {
        reason: format!("slope evaluation failed at fitted breakpoints: {e}"),
        last_theta: None,
    })?;
    Ok(BrokenParetoParams::new_unchecked(beta, tau))
}
