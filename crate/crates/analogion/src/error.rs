use std::path::PathBuf;

/// Crate-wide error type. `Parse`, `Validation` and `Config` are user errors
/// (CLI exit code 2); everything else maps to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing word in vocabulary: {0:?}")]
    MissingWord(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("sequence of {len} tokens exceeds backend limit {limit}")]
    Truncation { len: usize, limit: usize },

    #[error("negative generation failed: {0}")]
    Generation(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// true for errors caused by user input rather than internal failure
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation(_) | Error::Config(_) | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
