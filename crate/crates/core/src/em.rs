//! Monte-Carlo EM engines for the hierarchical count model
//! `Y_i ~ Poisson(A_i S_i + b_i)`, `S_i ~ Pareto_B(β, τ)`.
//!
//! Four fitters share one driver:
//!
//! * SAEM augments with the latent fluxes `S` (sufficient scheme): the
//!   E-step is a per-source Metropolis-Hastings chain with the prior as
//!   independence proposal, the M-step is the complete-data MLE on the
//!   pooled retained draws.
//! * AAEM augments with the uniforms `U_i = F_B(S_i; θ)` (ancillary scheme):
//!   the E-step chain lives on `(0,1)` with Uniform proposals and the M-step
//!   maximizes the Monte-Carlo Q-function over θ by Nelder-Mead.
//! * AEM alternates full SAEM and AAEM iterations, starting with SAEM.
//! * IEM interweaves them: each iteration runs the SAEM E+M step to get a
//!   half-step estimate, deterministically transforms the same retained flux
//!   draws to uniforms through the half-step CDF, and finishes with the AAEM
//!   M-step. No second sampling pass is needed.
//!
//! Per-source chains are conditionally independent given θ, so the E-step
//! parallelizes across sources; every chain draws from its own seed stream
//! derived from `(seed, iteration, source)`, which makes results identical
//! for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::distribution::{complete_mle, BrokenParetoParams};
use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, poisson_log_pmf_unnorm, SimplexConfig};
use crate::seed::{self, tag};

/// One source: photon count `y`, effective area `a` (expected counts per
/// unit flux), expected background count `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedSource {
    pub y: u64,
    pub a: f64,
    pub b: f64,
}

impl ObservedSource {
    pub fn new(y: u64, a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::Data(format!("effective area must be positive, got {a}")));
        }
        if b < 0.0 || !b.is_finite() {
            return Err(Error::Data(format!("background must be nonnegative, got {b}")));
        }
        Ok(Self { y, a, b })
    }
}

/// Nonempty collection of observed sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sources: Vec<ObservedSource>,
}

impl Dataset {
    pub fn new(sources: Vec<ObservedSource>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::Data("dataset must contain at least one source".into()));
        }
        Ok(Self { sources })
    }

    pub fn sources(&self) -> &[ObservedSource] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Plug-in flux estimates `max(y - b, 0.5) / a`. These ignore the Poisson
/// uncertainty entirely; they seed the EM iteration and drive the plain
/// empirical log N-log S curve, nothing else.
pub fn naive_fluxes(data: &Dataset) -> Vec<f64> {
    data.sources()
        .iter()
        .map(|s| (s.y as f64 - s.b).max(0.5) / s.a)
        .collect()
}

/// Monte-Carlo EM configuration.
#[derive(Debug, Clone)]
pub struct EmConfig {
    /// MH steps per E-step chain.
    pub n_sim: usize,
    /// Leading steps discarded from each chain.
    pub n_burn: usize,
    /// Maximum EM iterations.
    pub n_limit: usize,
    /// Relative-change convergence tolerance on θ (see [`EmConfig::default`]).
    pub theta_tol: f64,
    pub seed: u64,
    pub optimizer: SimplexConfig,
    /// IEM only: draw a fresh uniform sample at the half-step estimate
    /// instead of transforming the retained flux draws. Experimental; the
    /// transform variant is the supported one.
    pub iem_resample_u: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        // M-steps run inside a Monte-Carlo loop with θ-tolerance 1e-3, so the
        // inner simplex can stop well short of full machine precision.
        let optimizer = SimplexConfig { max_iters: 250, x_tol: 1e-6, ..SimplexConfig::default() };
        Self {
            n_sim: 1000,
            n_burn: 200,
            n_limit: 200,
            theta_tol: 1e-3,
            seed: 0,
            optimizer,
            iem_resample_u: false,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burn >= self.n_sim {
            return Err(Error::Domain(format!(
                "n_burn ({}) must be below n_sim ({})",
                self.n_burn, self.n_sim
            )));
        }
        if self.n_limit < 1 {
            return Err(Error::Domain("n_limit must be at least 1".into()));
        }
        if self.theta_tol <= 0.0 || self.theta_tol.is_nan() {
            return Err(Error::Domain("theta_tol must be positive".into()));
        }
        self.optimizer.validate()
    }
}

/// Retained Monte-Carlo draws from one E-step: `draws[s][i]` is the flux (or
/// uniform) of source `i` at retained sweep `s`.
#[derive(Debug, Clone)]
pub struct FluxSample {
    pub draws: Vec<Vec<f64>>,
    pub accept_rates: Vec<f64>,
}

impl FluxSample {
    /// Per-source posterior mean over the retained draws.
    pub fn posterior_mean(&self) -> Vec<f64> {
        let n = self.accept_rates.len();
        let mut mean = vec![0.0; n];
        for row in &self.draws {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let scale = 1.0 / self.draws.len() as f64;
        mean.iter_mut().for_each(|m| *m *= scale);
        mean
    }

    /// The last retained draw.
    pub fn last_draw(&self) -> Vec<f64> {
        self.draws.last().cloned().unwrap_or_default()
    }
}

/// Result of an EM fit. `trajectory` holds the full-step iterates θ^(0..K)
/// (so its length is `iterations + 1`); for IEM the half-step estimates are
/// kept separately in `half_steps`, one per iteration.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: BrokenParetoParams,
    pub trajectory: Vec<BrokenParetoParams>,
    pub half_steps: Vec<BrokenParetoParams>,
    pub converged: bool,
    pub iterations: usize,
    pub final_accept_rates: Vec<f64>,
}

/// One Metropolis update of a single source's flux with an independence
/// proposal from the prior. The prior density cancels against the proposal,
/// leaving the (tempered) Poisson ratio; everything happens in log space.
#[inline]
pub(crate) fn mh_update_flux<R: rand::Rng + ?Sized>(
    y: f64,
    area: f64,
    bkg: f64,
    s_cur: f64,
    theta: &BrokenParetoParams,
    t: f64,
    rng: &mut R,
) -> (f64, bool) {
    let u: f64 = rng.gen();
    let proposal = theta.quantile_survival(1.0 - u);
    let delta = poisson_log_pmf_unnorm(y, area * proposal + bkg)
        - poisson_log_pmf_unnorm(y, area * s_cur + bkg);
    let r: f64 = rng.gen();
    if r.ln() < t * delta {
        (proposal, true)
    } else {
        (s_cur, false)
    }
}

/// One systematic sweep (source 1..n) of the flux chain targeting the
/// tempered posterior `p(Y|S)^t p(S; θ)`; `t = 1` is the EM E-step kernel.
pub(crate) fn tempered_sweep<R: rand::Rng + ?Sized>(
    current: &[f64],
    theta: &BrokenParetoParams,
    data: &Dataset,
    t: f64,
    rng: &mut R,
) -> Vec<f64> {
    current
        .iter()
        .zip(data.sources())
        .map(|(&s, src)| mh_update_flux(src.y as f64, src.a, src.b, s, theta, t, rng).0)
        .collect()
}

/// One systematic Metropolis-Hastings sweep over the latent fluxes at the
/// posterior (`t = 1`). Proposal for source j is a fresh prior draw,
/// accepted with probability `min{1, g(Y_j; A_j S*_j + b_j) / g(Y_j; A_j S_j + b_j)}`
/// where `g` is the Poisson pmf.
pub fn mh_sweep_flux<R: rand::Rng + ?Sized>(
    current: &[f64],
    theta: &BrokenParetoParams,
    data: &Dataset,
    rng: &mut R,
) -> Vec<f64> {
    tempered_sweep(current, theta, data, 1.0, rng)
}

/// Per-source chain output in source-major layout.
struct ChainRun {
    /// per_source[i][s]: retained draw s of source i
    per_source: Vec<Vec<f64>>,
    accept_rates: Vec<f64>,
    final_states: Vec<f64>,
}

enum ChainSpace {
    Flux,
    Uniform,
}

/// Run the per-source E-step chains. In flux space the state is clamped to
/// the current support lower edge before the chain starts (the previous
/// iterate's state can fall below a grown `τ_1`).
fn run_estep(
    data: &Dataset,
    theta: &BrokenParetoParams,
    init: &[f64],
    space: ChainSpace,
    cfg: &EmConfig,
    iteration: u64,
) -> ChainRun {
    let retained = cfg.n_sim - cfg.n_burn;
    let tau1 = theta.tau()[0];
    let chain_tag = match space {
        ChainSpace::Flux => tag::CHAIN_S,
        ChainSpace::Uniform => tag::CHAIN_U,
    };
    let results: Vec<(Vec<f64>, f64, f64)> = data
        .sources()
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let mut rng = seed::stream(cfg.seed, &[chain_tag, iteration, i as u64]);
            let y = src.y as f64;
            let mut draws = Vec::with_capacity(retained);
            let mut accepted = 0usize;
            match space {
                ChainSpace::Flux => {
                    let mut s = init[i].max(tau1);
                    for step in 0..cfg.n_sim {
                        let (next, acc) = mh_update_flux(y, src.a, src.b, s, theta, 1.0, &mut rng);
                        s = next;
                        accepted += acc as usize;
                        if step >= cfg.n_burn {
                            draws.push(s);
                        }
                    }
                    (draws, accepted as f64 / cfg.n_sim as f64, s)
                }
                ChainSpace::Uniform => {
                    let mut u = init[i].clamp(U_EPS, 1.0 - U_EPS);
                    let mut mu_cur = src.a * theta.quantile_survival(1.0 - u) + src.b;
                    for step in 0..cfg.n_sim {
                        let u_prop: f64 = rng.gen();
                        let mu_prop = src.a * theta.quantile_survival(1.0 - u_prop) + src.b;
                        let delta = poisson_log_pmf_unnorm(y, mu_prop)
                            - poisson_log_pmf_unnorm(y, mu_cur);
                        let r: f64 = rng.gen();
                        if r.ln() < delta {
                            u = u_prop;
                            mu_cur = mu_prop;
                            accepted += 1;
                        }
                        if step >= cfg.n_burn {
                            draws.push(u);
                        }
                    }
                    (draws, accepted as f64 / cfg.n_sim as f64, u)
                }
            }
        })
        .collect();

    let mut per_source = Vec::with_capacity(results.len());
    let mut accept_rates = Vec::with_capacity(results.len());
    let mut final_states = Vec::with_capacity(results.len());
    for (draws, rate, state) in results {
        per_source.push(draws);
        accept_rates.push(rate);
        final_states.push(state);
    }
    ChainRun { per_source, accept_rates, final_states }
}

/// Uniforms are kept strictly inside (0, 1); the pooled sample minimum maps
/// to exactly zero under the half-step CDF, which the inverse cannot take.
const U_EPS: f64 = 1e-16;

fn to_uniform(theta: &BrokenParetoParams, s: f64) -> f64 {
    theta.cdf(s).clamp(U_EPS, 1.0 - U_EPS)
}

/// θ <-> unconstrained coordinates `[ln τ_1, ln gap_1.., ln β_1..]` used by
/// the ancillary M-step search. Every coordinate vector maps to a valid,
/// strictly increasing breakpoint set.
fn pack_theta(theta: &BrokenParetoParams) -> Vec<f64> {
    let b = theta.pieces();
    let mut z = Vec::with_capacity(2 * b);
    z.push(theta.tau()[0].ln());
    for j in 1..b {
        z.push((theta.tau()[j] - theta.tau()[j - 1]).ln());
    }
    for j in 0..b {
        z.push(theta.beta()[j].ln());
    }
    z
}

fn unpack_theta(z: &[f64]) -> BrokenParetoParams {
    let b = z.len() / 2;
    let mut tau = Vec::with_capacity(b);
    tau.push(z[0].exp());
    for gap in &z[1..b] {
        let prev = *tau.last().unwrap();
        tau.push(prev + gap.exp());
    }
    let beta: Vec<f64> = z[b..].iter().map(|v| v.exp()).collect();
    BrokenParetoParams::new_unchecked(beta, tau)
}

/// Ancillary M-step: maximize the Monte-Carlo Q-function
/// `Σ_s Σ_i log g(Y_i; A_i F_B^{-1}(U_i^(s); θ) + b_i)` over θ,
/// by Nelder-Mead in the log-reparameterized space, warm-started at `start`.
fn aaem_mstep(
    data: &Dataset,
    u_per_source: &[Vec<f64>],
    start: &BrokenParetoParams,
    optimizer: &SimplexConfig,
) -> Result<BrokenParetoParams> {
    let n_draws: usize = u_per_source[0].len();
    let objective = |z: &[f64]| -> f64 {
        let theta = unpack_theta(z);
        // ordered collect + sequential sum: floating-point reduction order
        // must not depend on the thread count
        let per_source: Vec<f64> = data
            .sources()
            .par_iter()
            .zip(u_per_source.par_iter())
            .map(|(src, us)| {
                let y = src.y as f64;
                let mut acc = 0.0;
                for &u in us {
                    let s = theta.quantile_survival(1.0 - u);
                    acc += poisson_log_pmf_unnorm(y, src.a * s + src.b);
                }
                acc
            })
            .collect();
        let total: f64 = per_source.iter().sum();
        -(total / n_draws as f64)
    };
    let (z_hat, fval) = nelder_mead(objective, &pack_theta(start), optimizer)?;
    if !fval.is_finite() {
        return Err(Error::Numeric("ancillary M-step objective non-finite".into()));
    }
    Ok(unpack_theta(&z_hat))
}

/// Averaged relative change of θ over the last three transitions; damps the
/// Monte-Carlo jitter that keeps MCEM iterates from settling exactly.
fn has_converged(traj: &[BrokenParetoParams], tol: f64) -> bool {
    if traj.len() < 4 {
        return false;
    }
    let rel = |a: &BrokenParetoParams, b: &BrokenParetoParams| -> f64 {
        let coords = |p: &BrokenParetoParams| {
            p.beta().iter().chain(p.tau().iter()).copied().collect::<Vec<f64>>()
        };
        coords(a)
            .iter()
            .zip(coords(b))
            .map(|(x, y)| (x - y).abs() / y.abs().max(1e-300))
            .fold(0.0f64, f64::max)
    };
    let k = traj.len();
    let mean = (rel(&traj[k - 1], &traj[k - 2])
        + rel(&traj[k - 2], &traj[k - 3])
        + rel(&traj[k - 3], &traj[k - 4]))
        / 3.0;
    mean < tol
}

#[derive(Clone, Copy, PartialEq)]
enum Algo {
    Saem,
    Aaem,
    Aem,
    Iem,
}

fn fit_with(
    algo: Algo,
    data: &Dataset,
    b: usize,
    cfg: &EmConfig,
    init: Option<BrokenParetoParams>,
) -> Result<FitResult> {
    cfg.validate()?;
    if b < 1 {
        return Err(Error::Domain("number of pieces must be at least 1".into()));
    }
    let naive = naive_fluxes(data);
    let theta0 = match init {
        Some(theta) => {
            if theta.pieces() != b {
                return Err(Error::Domain(format!(
                    "warm start has {} pieces, fit wants {b}",
                    theta.pieces()
                )));
            }
            theta
        }
        None => complete_mle(&naive, b, &cfg.optimizer)?,
    };

    // the flux vector is the canonical chain state; ancillary iterations
    // express it in U-coordinates of the current θ and map back afterwards
    let mut s_state: Vec<f64> = naive.iter().map(|&v| v.max(theta0.tau()[0])).collect();

    let mut trajectory = vec![theta0];
    let mut half_steps: Vec<BrokenParetoParams> = Vec::new();
    let mut final_accept_rates = vec![0.0; data.len()];
    let mut converged = false;

    let mstep_err = |e: Error, theta: &BrokenParetoParams| Error::FitFailed {
        reason: format!("M-step failed: {e}"),
        last_theta: Some(theta.clone()),
    };

    for k in 0..cfg.n_limit {
        let theta_k = trajectory.last().unwrap().clone();
        let saem_iteration = match algo {
            Algo::Saem | Algo::Iem => true,
            Algo::Aaem => false,
            Algo::Aem => k % 2 == 0,
        };

        let theta_next = if saem_iteration {
            let run = run_estep(data, &theta_k, &s_state, ChainSpace::Flux, cfg, k as u64);
            s_state = run.final_states.clone();
            final_accept_rates = run.accept_rates.clone();
            let pooled: Vec<f64> = run.per_source.iter().flatten().copied().collect();
            let theta_tilde =
                complete_mle(&pooled, b, &cfg.optimizer).map_err(|e| mstep_err(e, &theta_k))?;
            debug_assert!(
                theta_tilde.tau()[0]
                    <= pooled.iter().cloned().fold(f64::INFINITY, f64::min)
            );
            if algo == Algo::Iem {
                // transform the same retained draws through the half-step CDF
                let u_draws: Vec<Vec<f64>> = if cfg.iem_resample_u {
                    let init: Vec<f64> =
                        s_state.iter().map(|&s| to_uniform(&theta_tilde, s)).collect();
                    run_estep(data, &theta_tilde, &init, ChainSpace::Uniform, cfg, k as u64)
                        .per_source
                } else {
                    run.per_source
                        .iter()
                        .map(|draws| draws.iter().map(|&s| to_uniform(&theta_tilde, s)).collect())
                        .collect()
                };
                let next = aaem_mstep(data, &u_draws, &theta_tilde, &cfg.optimizer)
                    .map_err(|e| mstep_err(e, &theta_tilde))?;
                half_steps.push(theta_tilde);
                next
            } else {
                theta_tilde
            }
        } else {
            // ancillary iteration: chain on U at θ_k, then the NM M-step
            let u_init: Vec<f64> = s_state.iter().map(|&s| to_uniform(&theta_k, s)).collect();
            let run = run_estep(data, &theta_k, &u_init, ChainSpace::Uniform, cfg, k as u64);
            final_accept_rates = run.accept_rates.clone();
            s_state = run
                .final_states
                .iter()
                .map(|&u| theta_k.quantile_survival(1.0 - u))
                .collect();
            aaem_mstep(data, &run.per_source, &theta_k, &cfg.optimizer)
                .map_err(|e| mstep_err(e, &theta_k))?
        };

        trajectory.push(theta_next);
        if has_converged(&trajectory, cfg.theta_tol) {
            converged = true;
            break;
        }
    }

    let iterations = trajectory.len() - 1;
    Ok(FitResult {
        theta_hat: trajectory.last().unwrap().clone(),
        trajectory,
        half_steps,
        converged,
        iterations,
        final_accept_rates,
    })
}

/// EM with the sufficient augmentation scheme (latent fluxes).
pub fn saem_fit(data: &Dataset, b: usize, cfg: &EmConfig) -> Result<FitResult> {
    fit_with(Algo::Saem, data, b, cfg, None)
}

/// EM with the ancillary augmentation scheme (uniforms `U = F_B(S; θ)`).
pub fn aaem_fit(data: &Dataset, b: usize, cfg: &EmConfig) -> Result<FitResult> {
    fit_with(Algo::Aaem, data, b, cfg, None)
}

/// Alternating EM: SAEM on even iterations, AAEM on odd ones.
pub fn aem_fit(data: &Dataset, b: usize, cfg: &EmConfig) -> Result<FitResult> {
    fit_with(Algo::Aem, data, b, cfg, None)
}

/// Interwoven EM: each iteration runs the sufficient step to a half-step
/// estimate, re-expresses the same draws in the ancillary space, and applies
/// the ancillary M-step.
pub fn iem_fit(data: &Dataset, b: usize, cfg: &EmConfig) -> Result<FitResult> {
    fit_with(Algo::Iem, data, b, cfg, None)
}

/// Interwoven EM from an explicit starting estimate (bootstrap replicates
/// warm-start at the full-data fit).
pub(crate) fn iem_fit_from(
    data: &Dataset,
    b: usize,
    cfg: &EmConfig,
    init: Option<BrokenParetoParams>,
) -> Result<FitResult> {
    fit_with(Algo::Iem, data, b, cfg, init)
}

/// One posterior flux sample at fixed θ (a standalone E-step). Used to
/// impute fluxes for plotting and diagnostics.
pub fn flux_posterior_sample(
    data: &Dataset,
    theta: &BrokenParetoParams,
    cfg: &EmConfig,
) -> Result<FluxSample> {
    cfg.validate()?;
    let init: Vec<f64> = naive_fluxes(data);
    let run = run_estep(data, theta, &init, ChainSpace::Flux, cfg, 0);
    let retained = cfg.n_sim - cfg.n_burn;
    let n = data.len();
    let mut draws = vec![vec![0.0; n]; retained];
    for (i, chain) in run.per_source.iter().enumerate() {
        for (s, &v) in chain.iter().enumerate() {
            draws[s][i] = v;
        }
    }
    Ok(FluxSample { draws, accept_rates: run.accept_rates })
}
