use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis, simulation, evaluation or search pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal too short: {len} samples, need at least {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unstable filter design: {0}")]
    UnstableFilter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Short category label used for CLI exit messages.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) | Error::SignalTooShort { .. } => "config",
            Error::ShapeMismatch(_) => "shape",
            Error::UnstableFilter(_) | Error::NonFinite(_) => "numeric",
            Error::Parse { .. } | Error::Csv(_) => "format",
            Error::Dataset(_) => "dataset",
            Error::Wav(_) | Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
