use thiserror::Error;

/// Errors raised by state construction, channel evaluation and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("distribution is not passive: entry {index} ({next}) exceeds entry {prev}")]
    NotPassive { index: usize, prev: f64, next: f64 },

    #[error("total mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("environment is not normalized")]
    UnnormalizedEnvironment,

    #[error(
        "truncation budget exceeded: residual mass {residual:e} above tolerance {tol:e} at {max_photons} photons"
    )]
    TruncationBudget {
        residual: f64,
        tol: f64,
        max_photons: usize,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
