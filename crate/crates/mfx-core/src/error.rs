//! Error taxonomy shared by every module.
//!
//! Four failure classes, so callers (and the CLI's exit codes) can tell apart
//! "you asked for something invalid" from "the data cannot support the answer"
//! from "the numerics gave up":
//!
//! * [`Error::Parameter`] — a precondition on arguments was violated.
//! * [`Error::Format`] — an input stream does not match its declared layout.
//! * [`Error::Domain`] — data-dependent failure (empty intersection, zero
//!   variance, non-positive rates, degenerate scales).
//! * [`Error::Fit`] — a regression had too few usable points.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading or writing an artifact.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An artifact could not be serialized or deserialized.
    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),

    /// Input stream violates its declared format; `line` is 1-based.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// An argument violates a stated precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The data cannot support the requested computation.
    #[error("data error: {0}")]
    Domain(String),

    /// A fit could not be performed; `excluded` counts points dropped
    /// before the failure was declared.
    #[error("fit error: {message} ({excluded} points excluded)")]
    Fit { message: String, excluded: usize },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a parameter error.
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Shorthand for a domain (data) error.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
