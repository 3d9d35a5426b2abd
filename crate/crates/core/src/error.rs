use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula hit a pole (division by zero, resonance).
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Parametric drive at or above the instability threshold.
    #[error("parametric drive {lambda} rad/us is at or above threshold {threshold} rad/us")]
    AboveThreshold { lambda: f64, threshold: f64 },

    /// A root or target value cannot be reached inside the search bracket.
    #[error("unreachable target: {0}")]
    Unreachable(String),

    /// The ODE integrator could not meet its tolerances.
    #[error("integration failure at t = {t} us: {reason}")]
    Integration { t: f64, reason: String },

    /// Top Fock-level population exceeded the adequacy threshold.
    #[error("truncation inadequate: slot {slot} top population {population:e} exceeds {threshold:e}")]
    Truncation {
        slot: usize,
        population: f64,
        threshold: f64,
    },

    /// A fit did not converge or its input is degenerate.
    #[error("fit failure: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
