use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the singit library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input is structurally valid but carries no usable signal (empty, silent, zero-norm).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("separator adapter failed: {0}")]
    Adapter(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("training diverged: {0}")]
    Diverged(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
