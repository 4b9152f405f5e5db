use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate sentence id {0}")]
    DuplicateSentence(usize),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid embeddings file: {0}")]
    InvalidEmbeddings(String),

    #[error("embedding row count {found} does not match {expected} occurrences")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid label {text:?}: {reason}")]
    Label { text: String, reason: String },

    #[error("cluster count {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("clustering needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("cut does not belong to this dendrogram: {0}")]
    Mismatch(String),

    #[error("invalid agreement table: {0}")]
    Agreement(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.to_string(),
        }
    }
}
