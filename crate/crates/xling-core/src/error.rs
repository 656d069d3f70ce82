//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (word2vec text, seed lexicons, CoNLL-U, corpora).
    #[error("format error in {path} (line {line}): {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    /// XML that does not parse or does not match the dictionary schema.
    #[error("dictionary schema error in {path}: {msg}")]
    Schema { path: String, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Vector/matrix dimensions that do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Zero vectors and other inputs for which the operation is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Too few rows/dimensions for the requested decomposition.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("construction error: {0}")]
    Construction(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Unreadable or unsupported persisted model.
    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
