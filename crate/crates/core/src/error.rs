//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent dimensions or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input violates a documented invariant (non-PSD covariance, empty
    /// trace, boundary condition, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// Ill-conditioned or non-finite arithmetic (singular innovation
    /// covariance, non-finite log-likelihood, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// An iteration failed to converge within its budget.
    #[error("divergence: {0}")]
    Divergence(String),
    /// All particle weights underflowed.
    #[error("weight degeneracy: {0}")]
    Degeneracy(String),
    /// A solver terminated without a trustworthy verdict.
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
