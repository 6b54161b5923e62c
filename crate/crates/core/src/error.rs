use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input. `line` is 1-based; `context` names the record being read.
    #[error("parse error at line {line}{}: {message}", context_suffix(.context))]
    Parse {
        line: usize,
        context: Option<String>,
        message: String,
    },

    /// Well-formed input that violates a data invariant.
    #[error("validation error{}: {message}", line_suffix(.line))]
    Validation { line: Option<usize>, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A judgment submission that leaves pooled documents ungraded.
    #[error("incomplete submission: {} pooled documents have no grade", missing.len())]
    Incomplete { missing: Vec<String> },

    #[error("unauthorized: {0}")]
    Unauthorized(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

fn line_suffix(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, context: Option<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            context,
            message: message.into(),
        }
    }

    pub(crate) fn validation(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Validation {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
