use thiserror::Error;

use crate::functionals::DiagnosticSeries;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// Solver breakdown. `partial` carries the diagnostics recorded before the failure.
    #[error("numerical failure at t = {t}: {reason}")]
    NumericalFailure {
        t: f64,
        reason: String,
        partial: Option<Box<DiagnosticSeries>>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record store schema version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::HypothesisViolation(msg.into())
    }

    pub(crate) fn numerical(t: f64, reason: impl Into<String>) -> Self {
        Error::NumericalFailure {
            t,
            reason: reason.into(),
            partial: None,
        }
    }
}
