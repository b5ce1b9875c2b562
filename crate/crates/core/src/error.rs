use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the construction and verification pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to tolerance ({context}): pivot {pivot:e} below {threshold:e}")]
    Singular {
        context: &'static str,
        pivot: f64,
        threshold: f64,
    },

    #[error("spectral parameter {0} sits on a pole of the Lax pair (lambda = +-1)")]
    LaxPole(Complex64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid block grid: {0}")]
    InvalidBlockGrid(String),

    #[error("column {0} has zero norm")]
    ZeroNormColumn(usize),

    #[error("spectral data is not of the (mu, conj mu) form required here: {0}")]
    NotUnitaryConfiguration(String),

    #[error("closed-form denominator vanishes ({0:e})")]
    VanishingDenominator(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
