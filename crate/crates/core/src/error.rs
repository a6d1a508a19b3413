use thiserror::Error;

/// Errors raised by structured-matrix construction and the fast algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("pivot breakdown at elimination step {step} (|pivot| = {pivot:e})")]
    PivotBreakdown { step: usize, pivot: f64 },
    #[error("pole collision: y[{i}] == x[{j}]")]
    PoleCollision { i: usize, j: usize },
    #[error("zero node y[{i}] in Cauchy generator")]
    ZeroY { i: usize },
    #[error("singular displacement operator: 1 - a[{i}]*b[{j}] vanishes")]
    SingularOperator { i: usize, j: usize },
    #[error("series diverges: |a[{i}]*b[{j}]| = {product} >= 1")]
    SeriesDivergence { i: usize, j: usize, product: f64 },
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("first column and first row disagree at the corner")]
    CornerMismatch,
    #[error("entry ({row}, {col}) lies outside the declared band")]
    BandViolation { row: usize, col: usize },
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
    #[error("singular diagonal block {0}")]
    SingularBlock(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code for this failure: 1 usage, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PivotBreakdown { .. }
            | Error::PoleCollision { .. }
            | Error::ZeroY { .. }
            | Error::SingularOperator { .. }
            | Error::SeriesDivergence { .. }
            | Error::SingularBlock(_) => 2,
            Error::Io(_) | Error::Parse(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
