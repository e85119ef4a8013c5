use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("digit {digit} out of range for base {k}")]
    DigitOutOfRange { digit: usize, k: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate block: Σ_f({n}) = {value} is not positive")]
    DegenerateBlock { n: u32, value: String },
    #[error("subspace is not invariant under digit {digit} (residual {residual:.3e})")]
    NotInvariant { digit: usize, residual: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("enumeration budget exceeded: {needed} products requested, budget {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("verification mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
