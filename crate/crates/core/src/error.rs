use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Every gradient magnitude in the region is zero.
    #[error("no dominant gradient direction")]
    NoDominantDirection,

    #[error("no processable windows, descriptor would be empty")]
    EmptyDescriptor,

    /// A run produced nothing to write.
    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("histogram is not L1-normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("stain basis estimation failed: {0}")]
    BasisEstimationFailed(String),

    #[error("invalid stain basis: {0}")]
    InvalidBasis(String),

    #[error("invalid split manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
