use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the burst-detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus contains no valid documents ({skipped} records skipped)")]
    EmptyCorpus { skipped: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("division guard: collection size for period {period} is zero")]
    ZeroCollection { period: usize },

    #[error("non-finite value encountered at iteration {iteration} (row {row})")]
    Numerical { iteration: usize, row: usize },

    #[error("parse error in {context} at line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("no eligible pairs for burst injection (need mean count > {mu_min}); increase base rates")]
    NoEligiblePairs { mu_min: f64 },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("unknown export format `{0}` (expected graphml, dot or json)")]
    UnknownFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}
