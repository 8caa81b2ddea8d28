use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("non-conforming shape: {0}")]
    Shape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("point not on the discriminant: {0}")]
    NotOnDiscriminant(String),
    #[error("sample not on the claimed stratum: {0}")]
    Stratum(String),
    #[error("truncation order too small: {0}")]
    Truncation(String),
    #[error("factorization condition fails: {0}")]
    Factorization(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("case not covered: {0}")]
    Uncovered(String),
}

pub type Result<T> = std::result::Result<T, Error>;
