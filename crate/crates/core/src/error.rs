use thiserror::Error;

/// Failures reported by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: insufficient precision: {msg}")]
    Precision { op: &'static str, msg: String },

    #[error("quadrature did not converge after {levels} levels (error estimate {estimate:e})")]
    Quadrature { estimate: f64, levels: usize },

    #[error("{op}: consistency check failed: {msg}")]
    Consistency { op: &'static str, msg: String },

    #[error("integration stopped at s = {s}: {msg}")]
    Singularity { s: f64, msg: String },

    #[error("s = {s} outside the integrated range [{lo}, {hi}]")]
    Range { s: f64, lo: f64, hi: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("fit quality: spread {spread:e} exceeds bound {bound:e}")]
    FitQuality { spread: f64, bound: f64 },

    #[error("{op}: solver failure: {msg}")]
    Solver { op: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn precision(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precision { op, msg: msg.into() }
    }

    pub(crate) fn consistency(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Consistency { op, msg: msg.into() }
    }

    pub(crate) fn solver(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Solver { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
