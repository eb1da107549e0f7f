use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (supported: 1..=3)")]
    UnsupportedDimension(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("vector lies outside the span of the body's generators (gauge is unbounded)")]
    UnboundedGauge,

    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("condition number {condition:e} exceeds limit {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("cell index {index} out of range for {cells} cells")]
    CellOutOfRange { index: usize, cells: usize },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid data: {0}")]
    Invalid(String),
}
