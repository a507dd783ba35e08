//! Error type shared by the whole core crate.

use thiserror::Error;

/// Errors surfaced by constructors, validators, and compilers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pulse conventions failed to close: {0}")]
    ConventionFailure(String),

    #[error("malformed input: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
