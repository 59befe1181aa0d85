use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight sequence increases at k={k}: p[k]={prev}, p[k+1]={next}")]
    NonMonotoneWeights { k: usize, prev: f64, next: f64 },
    #[error("weight p[{k}]={value} is not positive")]
    NonPositiveWeight { k: usize, value: f64 },
    #[error("negative matrix entry s[{row},{col}]")]
    NegativeWeight { row: usize, col: usize },
    #[error("index map is not strictly increasing at position {position}")]
    NonIncreasingIndexMap { position: usize },
    #[error("row {row} is not defined (method provides {available} rows)")]
    RowOutOfRange { row: usize, available: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquareMatrix { rows: usize, cols: usize },
    #[error("rational orbit exceeded {limit} bits at step {step}")]
    RationalOverflow { step: usize, limit: u64 },
    #[error("point does not belong to this system: {0}")]
    InvalidPoint(String),
    #[error("observable {name} cannot be evaluated on this point")]
    ObservableMismatch { name: String },
    #[error("at least {needed} checkpoints are required, got {found}")]
    TooFewCheckpoints { needed: usize, found: usize },
    #[error("checkpoints must be strictly increasing")]
    UnorderedCheckpoints,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("bound L({dim}) does not fit in 64 bits")]
    BoundOverflow { dim: usize },
    #[error("linear program reported infeasible")]
    LpInfeasible,
    #[error("linear program failed: {0}")]
    LpNumericalFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonMonotoneWeights { .. } => "NonMonotoneWeights",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::NonIncreasingIndexMap { .. } => "NonIncreasingIndexMap",
            Error::RowOutOfRange { .. } => "RowOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::SingularMatrix => "SingularMatrix",
            Error::NonSquareMatrix { .. } => "NonSquareMatrix",
            Error::RationalOverflow { .. } => "RationalOverflow",
            Error::InvalidPoint(_) => "InvalidPoint",
            Error::ObservableMismatch { .. } => "ObservableMismatch",
            Error::TooFewCheckpoints { .. } => "TooFewCheckpoints",
            Error::UnorderedCheckpoints => "UnorderedCheckpoints",
            Error::EmptyGrid => "EmptyGrid",
            Error::BoundOverflow { .. } => "BoundOverflow",
            Error::LpInfeasible => "LpInfeasible",
            Error::LpNumericalFailure(_) => "LpNumericalFailure",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

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
