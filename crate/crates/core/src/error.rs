use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The ensemble (or mixture pair) carries no usable direction.
    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    /// Both tuning differences are inside the noise floor.
    #[error("weak signal: |delta0| = {delta0:.3e}, |delta1| = {delta1:.3e} both <= threshold {threshold:.3e}")]
    WeakSignal { delta0: f64, delta1: f64, threshold: f64 },

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("cos(theta) = {value} outside [-1, 1] beyond tolerance {tolerance}")]
    CosThetaOutOfRange { value: f64, tolerance: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag, used for the `status` column of trial rows.
    pub fn status_tag(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract_violation",
            Error::DegenerateEnsemble(_) => "degenerate_ensemble",
            Error::WeakSignal { .. } => "weak_signal",
            Error::InvalidPriors(_) => "invalid_priors",
            Error::CosThetaOutOfRange { .. } => "cos_theta_out_of_range",
            Error::Config(_) => "config_error",
            Error::Io { .. } => "io_error",
        }
    }
}
