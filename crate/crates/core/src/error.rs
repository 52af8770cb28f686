use thiserror::Error;

/// Errors raised by evaluators, solvers and the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method failed to reach the requested accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A reconstruction configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A simulation could not complete.
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
