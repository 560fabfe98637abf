use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the erosion toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty shape")]
    EmptyShape,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("sequence shorter than kernel (length {len}, kernel {kernel})")]
    SequenceShorterThanKernel { len: usize, kernel: usize },

    #[error("token id {id} out of range for vocabulary of {vocab_size}")]
    TokenOutOfRange { id: usize, vocab_size: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("first-half selector requires even blocks (got {0})")]
    OddBlocks(usize),

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),

    #[error("entry not deactivatable: `{0}`")]
    NotDeactivatable(String),

    #[error("not a Sentiment140 file ({skipped} of {total} rows malformed)")]
    NotSentiment140 { skipped: usize, total: usize },

    #[error("balanced generator requires even n (got {0})")]
    OddExampleCount(usize),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Attach a file path to an error raised while reading or writing it.
    pub fn at_path(self, path: impl Into<PathBuf>) -> Self {
        Error::Path {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
