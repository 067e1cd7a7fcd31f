use thiserror::Error;

/// Errors returned by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Young diagram: {0}")]
    InvalidDiagram(String),

    #[error("diagram has {rows} nonzero rows but only {max} are allowed")]
    TooManyRows { rows: usize, max: usize },

    #[error("box counts do not match: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hilbert-space dimension {dim} exceeds the limit {limit}")]
    SizeLimit { dim: usize, limit: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
