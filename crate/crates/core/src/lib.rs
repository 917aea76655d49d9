//! Estimation of broken power-law ("log N-log S") flux distributions from
//! Poisson photon counts.
//!
//! Source fluxes `S_i` follow a B-piece Pareto law; each source is observed
//! only through a count `Y_i ~ Poisson(A_i S_i + b_i)` with known effective
//! area `A_i` and background `b_i`. This crate provides:
//!
//! * [`distribution`] - the broken Pareto law and its complete-data MLE,
//! * [`numerics`] - simplex minimizer, incomplete gamma, quadrature, and the
//!   closed-form likelihood for background-free data,
//! * [`em`] - Monte-Carlo EM fitters (sufficient, ancillary, alternating,
//!   and interwoven augmentation) for the MLE at fixed B,
//! * [`likelihood`] - stable log-likelihood evaluation by tempering
//!   (power posterior / path sampling),
//! * [`model_select`] - AIC/BIC choice of the number of pieces,
//! * [`bootstrap`] - resampling standard errors,
//! * [`simulate`] - synthetic data generation and log N-log S curves.
//!
//! Everything is deterministic given explicit seeds, independent of thread
//! count.

pub mod bootstrap;
pub mod distribution;
pub mod em;
pub mod error;
pub mod likelihood;
pub mod model_select;
pub mod numerics;
pub mod seed;
pub mod simulate;

pub use bootstrap::{bootstrap_se, BootstrapReport};
pub use distribution::{
    beta_given_tau, complete_mle, profile_loglik, BrokenParetoParams, SegmentCounts,
};
pub use em::{
    aaem_fit, aem_fit, flux_posterior_sample, iem_fit, mh_sweep_flux, naive_fluxes, saem_fit,
    Dataset, EmConfig, FitResult, FluxSample, ObservedSource,
};
pub use error::{Error, Result};
pub use likelihood::{
    power_posterior_loglik, tempered_mh_sweep, LoglikEstimate, PowerPosteriorConfig,
};
pub use model_select::{criterion, select_b, CandidateReport, CriterionKind, SelectionReport};
pub use numerics::{
    closed_form_loglik_nobg, integrate_grid, nelder_mead, upper_incomplete_gamma, SimplexConfig,
};
pub use simulate::{generate, lognlogs_curve, lognlogs_overlay, PerSource, SimSetting, SimulatedData};
