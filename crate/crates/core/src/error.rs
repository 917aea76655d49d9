use thiserror::Error;

use crate::distribution::BrokenParetoParams;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters violate the model's parameter space (nonpositive slope,
    /// nonincreasing breakpoints, equal adjacent slopes, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent observed data.
    #[error("data error: {0}")]
    Data(String),

    /// An EM fit could not be completed. Carries the last valid iterate,
    /// when one exists, so callers can inspect how far the fit got.
    #[error("fit failed: {reason}")]
    FitFailed {
        reason: String,
        last_theta: Option<BrokenParetoParams>,
    },

    /// A numerical computation left its reliable envelope (overflow,
    /// non-finite intermediate). Never silently returns NaN instead.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Bootstrap resampling produced no usable replicates.
    #[error("bootstrap failed: {0}")]
    Bootstrap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
