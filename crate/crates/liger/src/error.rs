//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Unified error type for loaders, estimators, and drivers.
#[derive(Debug, Error)]
pub enum LigerError {
    /// A file does not match its declared layout (bad magic, version, header).
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Contents are structurally fine but violate a domain invariant.
    /// `field` names the offending field or column.
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    /// Dimension or length mismatch between paired inputs.
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: String,
        expected: usize,
        found: usize,
    },

    /// A caller-supplied argument is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A condition the engine promises can never happen.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LigerError {
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LigerError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        LigerError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn shape(what: impl Into<String>, expected: usize, found: usize) -> Self {
        LigerError::Shape {
            what: what.into(),
            expected,
            found,
        }
    }
}

pub type Result<T> = std::result::Result<T, LigerError>;
