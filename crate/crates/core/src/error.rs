use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate polytope: {0}")]
    Degenerate(String),
    #[error("invalid lower deformation: {0}")]
    InvalidDeformation(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not a 1-unit")]
    NotOneUnit,
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("unit root: {0}")]
    UnitRoot(String),
    #[error("insufficient degree bound: {0}")]
    Recovery(String),
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("line {line}, column {col}: {msg}")]
    Config { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
