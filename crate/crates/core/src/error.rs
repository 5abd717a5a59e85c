//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("matrix is not unitary: max deviation of U†U from I is {max_deviation:.3e}")]
    NotUnitary { max_deviation: f64 },

    #[error("state vector norm {norm} deviates from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown registry id: {0}")]
    UnknownRegistryId(String),

    #[error("registry parameter out of admissible range: violated {0}")]
    InadmissibleParameter(String),

    #[error("bisection bracket failure; scan trace: {0}")]
    BracketFailure(String),

    #[error("constraint null space is empty")]
    EmptyNullSpace,

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
