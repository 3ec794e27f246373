use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (`s < 2`, `n < 1`, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold for the supplied data.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Exhaustive enumeration was requested beyond its complexity cap.
    #[error("universe cap {cap} exceeds the exhaustive enumeration limit {limit}")]
    Guard { cap: u64, limit: u64 },
    /// The input carries nothing to compute a statistic from.
    #[error("no data: {0}")]
    NoData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
