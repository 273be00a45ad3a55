//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds eps_eq {eps:.3e}")]
    NotHermitian { asymmetry: f64, eps: f64 },

    #[error("space mismatch: expected `{expected}`, got `{got}`")]
    SpaceMismatch { expected: String, got: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("unknown built-in `{0}`")]
    UnknownBuiltin(String),

    #[error("numerical postcondition violated: {0}")]
    Numerics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
