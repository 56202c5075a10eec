use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("unsupported audio format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("audio too short: {len} samples, need at least {fft_size}")]
    AudioTooShort { len: usize, fft_size: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate value range for coefficient {coeff}: all training values equal")]
    DegenerateRange { coeff: usize },

    #[error("parse error in {path} line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("annotation validation failed in {path}: {reason}")]
    Validation { path: PathBuf, reason: String },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("class `{class}` has {available} files, need {requested}")]
    InsufficientFiles {
        class: String,
        available: usize,
        requested: usize,
    },

    #[error("model integrity error: {0}")]
    Integrity(String),

    #[error("unsupported model format version {found}, expected {expected}")]
    FormatVersion { found: u32, expected: u32 },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
