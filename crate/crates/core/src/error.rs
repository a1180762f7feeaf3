use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A stated precondition of a solution-transport map does not hold.
    #[error("precondition failed: {condition} ({detail})")]
    Precondition {
        condition: &'static str,
        detail: String,
    },

    /// An iterative numerical routine did not reach its tolerance.
    #[error("numeric failure: {what}, achieved tolerance {achieved:e}")]
    Numeric { what: String, achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
