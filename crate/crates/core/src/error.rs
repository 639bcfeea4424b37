use thiserror::Error;

/// Errors produced by attrdiff operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unparseable value {text:?} at row {row}, column {col}")]
    Parse {
        row: usize,
        col: usize,
        text: String,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right} columns")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

impl Error {
    /// True for failures of the underlying filesystem, as opposed to bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
