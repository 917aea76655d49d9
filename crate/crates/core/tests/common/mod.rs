//! Shared fixtures for the integration suites: dataset builders and the
//! direct (non-EM) maximum-likelihood baseline for background-free data.
//!
//! Each test binary compiles this module separately, so not every item is
//! used by every binary.
#![allow(dead_code)]

use lognlogs::numerics::closed_form_loglik_nobg;
use lognlogs::{
    generate, naive_fluxes, nelder_mead, BrokenParetoParams, Dataset, PerSource, SimSetting,
    SimplexConfig,
};

/// Single power-law dataset with no background: the regime where the exact
/// likelihood is available and EM output can be judged against it.
pub fn b1_nobg_dataset(beta: f64, tau: f64, n: usize, area: f64, seed: u64) -> Dataset {
    let setting = SimSetting {
        params: BrokenParetoParams::new(vec![beta], vec![tau]).unwrap(),
        n,
        area: PerSource::Constant(area),
        background: PerSource::Constant(0.0),
        seed,
    };
    generate(&setting).unwrap().into_dataset()
}

pub fn counts_and_areas(data: &Dataset) -> (Vec<u64>, Vec<f64>) {
    (
        data.sources().iter().map(|s| s.y).collect(),
        data.sources().iter().map(|s| s.a).collect(),
    )
}

/// Maximize the closed-form single-piece log-likelihood directly by
/// Nelder-Mead over (ln τ, ln β) with a few fixed restarts. This is the
/// "horizontal dashed line" baseline every EM variant is measured against.
pub fn direct_mle_b1_nobg(data: &Dataset) -> (BrokenParetoParams, f64) {
    let (ys, areas) = counts_and_areas(data);
    let tau0 = naive_fluxes(data).into_iter().fold(f64::INFINITY, f64::min);
    let objective = |z: &[f64]| -> f64 {
        let params = BrokenParetoParams::new(vec![z[1].exp()], vec![z[0].exp()]);
        match params.and_then(|p| closed_form_loglik_nobg(&p, &ys, &areas)) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let cfg = SimplexConfig { max_iters: 2000, x_tol: 1e-12, ..SimplexConfig::default() };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for beta0 in [0.6f64, 1.0, 1.8, 3.0] {
        for tau_scale in [0.85f64, 1.0] {
            let start = [(tau0 * tau_scale).ln(), beta0.ln()];
            let (z, f) = nelder_mead(objective, &start, &cfg).unwrap();
            if best.as_ref().map_or(true, |(_, bf)| f < *bf) {
                best = Some((z, f));
            }
        }
    }
    let (z, f) = best.unwrap();
    let params = BrokenParetoParams::new(vec![z[1].exp()], vec![z[0].exp()]).unwrap();
    (params, -f)
}

/// First EM iteration whose closed-form log-likelihood comes within
/// `threshold` of `optimum`; `None` if the trajectory never does.
pub fn iterations_to_gap(
    trajectory: &[BrokenParetoParams],
    data: &Dataset,
    optimum: f64,
    threshold: f64,
) -> Option<usize> {
    let (ys, areas) = counts_and_areas(data);
    trajectory.iter().position(|theta| {
        closed_form_loglik_nobg(theta, &ys, &areas)
            .map(|ll| optimum - ll <= threshold)
            .unwrap_or(false)
    })
}
