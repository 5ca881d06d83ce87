use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter, or a combination of parameters, is not admissible.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Vector or matrix dimensions do not agree.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    /// The estimation matrix lacks the orthogonality the estimator relies on.
    #[error("estimation error: {0}")]
    Estimation(String),
    /// A caller violated an operation contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
