use thiserror::Error;

/// Errors produced anywhere in the relaxation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "interior-point solver hit the iteration cap ({iterations}) before reaching tolerance"
    )]
    MaxIterations { iterations: usize },

    #[error("interior-point solver failed: {0}")]
    NumericalFailure(String),

    #[error("dual decomposition inconsistent: max |W - W+ - K - 2E_D| = {residual:.3e}")]
    CertificateInconsistent { residual: f64 },

    #[error("no atomic structure detected in correlogram")]
    NotAtomic,

    #[error("autocorrelation vanishes where the target is positive (cell {index})")]
    DivergentRatio { index: usize },

    #[error("certificate inconsistency: {0}")]
    Inconsistent(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
