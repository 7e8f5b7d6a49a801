use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// Every segment of the curve has zero length.
    #[error("curve is fully degenerate (all segments have zero length)")]
    DegenerateCurve,

    #[error("zero-length segment at index {0}")]
    ZeroLengthSegment(usize),

    #[error("parameter grids do not match: {0}")]
    GridMismatch(String),

    #[error("invalid metric parameters: {0}")]
    InvalidParams(String),

    #[error("invalid reparametrization: {0}")]
    InvalidReparametrization(String),

    #[error("invalid alignment grid: {0}")]
    InvalidGrid(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("open/closed mismatch: {0}")]
    ClosureMismatch(String),

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
