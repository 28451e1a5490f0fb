//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside its documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A polygon collapsed (zero area, repeated vertices, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// The requested depth would exceed a hard resource cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
