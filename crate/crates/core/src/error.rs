use thiserror::Error;

/// Errors raised by the numerical core, the learner and the criteria.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Newton iterations diverged after {iterations} steps (separable data with a flat prior?)")]
    Diverged { iterations: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("pool is empty")]
    EmptyPool,

    #[error("non-finite score {score} for pool index {index}")]
    NonFiniteScore { index: usize, score: f64 },

    #[error("pool index {index}: {source}")]
    Candidate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("requested split sizes ({requested}) exceed available rows ({available})")]
    SizeOverflow { requested: usize, available: usize },

    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("missing value at row {row}, column {column:?}")]
    MissingValue { row: usize, column: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_candidate(self, index: usize) -> Self {
        Error::Candidate {
            index,
            source: Box::new(self),
        }
    }

    /// Strips any candidate tagging and returns the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::Candidate { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
