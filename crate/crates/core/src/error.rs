use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PNG {path}: {message}")]
    Png { path: PathBuf, message: String },

    #[error("unsupported PNG format in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("image {width}x{height} exceeds the {limit}-pixel side limit")]
    Size { width: u32, height: u32, limit: u32 },

    #[error("raster dimension mismatch: {left:?} vs {right:?}")]
    Dimension { left: (u32, u32), right: (u32, u32) },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("class error: {0}")]
    Class(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("JSON error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
