//! Spectrum-aware debiasing for penalized linear regression.
//!
//! The crate fits elastic-net type estimators, debiases them with an
//! adjustment computed from the eigenvalues of `XᵀX`, and provides
//! coordinate-wise inference, a principal-components variant for signals
//! aligned with leading eigenvectors, and a state-evolution oracle.

pub mod adjust;
pub mod debias;
pub mod designs;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod gaussian;
pub mod inference;
pub mod io;
pub mod pcr;
pub mod penalty;
pub mod rng;
pub mod roots;
pub mod spectral;
pub mod stats;
pub mod vamp;

pub use error::{Error, Result};
pub use penalty::Penalty;
