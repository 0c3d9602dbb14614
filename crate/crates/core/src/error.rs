use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the combiner kernel, the evaluation harness, the file
/// loaders and the synthetic generator.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or collection failed a range or shape check.
    #[error("invalid {param}: {reason}")]
    Validation { param: String, reason: String },

    /// Prediction vectors in one frame (or across files) disagree on class count.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Samples present in some sources but not others.
    #[error("coverage mismatch: {context}: {}", .sample_ids.join(", "))]
    Coverage {
        context: String,
        sample_ids: Vec<String>,
    },

    #[error("no label for sample `{0}`")]
    MissingLabel(String),

    #[error("duplicate model_id `{0}`")]
    DuplicateModel(String),

    #[error("{}:{line}: duplicate sample_id `{sample_id}`", .path.display())]
    DuplicateSample {
        path: PathBuf,
        line: usize,
        sample_id: String,
    },

    #[error("{}:{line}: expected {expected} confidences, found {found}", .path.display())]
    Arity {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
