//! Error type shared by every module, with a stable machine-readable code.

use thiserror::Error;

/// Which branch of the well-definedness certificate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateFailure {
    /// Every extended second derivative is infinite.
    NoFiniteCurvature,
    /// Some curvature and some eigenvalue are zero and `‖d2‖₀ + ‖hpp‖₀ ≤ p`.
    InsufficientRank { nnz_d2: usize, nnz_hpp: usize, p: usize },
}

impl std::fmt::Display for CertificateFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertificateFailure::NoFiniteCurvature => {
                write!(f, "all extended second derivatives are infinite")
            }
            CertificateFailure::InsufficientRank { nnz_d2, nnz_hpp, p } => write!(
                f,
                "some curvature and some eigenvalue vanish and nnz(d2) + nnz(hpp) = {} + {} <= p = {}",
                nnz_d2, nnz_hpp, p
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("adjustment equation is not well defined: {0}")]
    Certificate(CertificateFailure),

    #[error("noise level is not identifiable: feasibility ratio {ratio} is within {tol} of 1")]
    Feasibility { ratio: f64, tol: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fixed-point iterate left the domain: {0}")]
    Domain(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable error code used by the CLI and the experiment harness.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Certificate(_) => "CERTIFICATE_FAILED",
            Error::Feasibility { .. } => "FEASIBILITY_FAILED",
            Error::NonConvergence { .. } | Error::Domain(_) => "NONCONVERGENCE",
            Error::DimMismatch(_) => "DIM_MISMATCH",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::Linalg(_) => "LINALG",
            Error::Io(_) => "IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
