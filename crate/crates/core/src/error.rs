use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("detector `{detector}` failed: {message}")]
    Detector { detector: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn detector(detector: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Detector {
            detector: detector.into(),
            message: message.into(),
        }
    }

    /// True for failures that come from malformed or misaligned input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidToken(_)
                | Error::Validation(_)
                | Error::Parse { .. }
                | Error::ModelFormat(_)
                | Error::Json(_)
                | Error::Undefined(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
