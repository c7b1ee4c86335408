use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max deviation {max_dev:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { max_dev: f64, tol: f64 },

    #[error("eigensolver failed to converge within {0} iterations")]
    NoConvergence(usize),

    #[error("bit-string length mismatch: expected {expected} qubits, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("problem size exceeds supported limit: {0}")]
    SizeLimit(String),

    #[error("ensemble has no exact moment representation; enumeration unavailable")]
    NotEnumerable,

    #[error("moment operator has mass {0:.3e} outside the symmetric subspace")]
    SupportLeak(f64),

    #[error("observable must be positive semidefinite for the relative bound (min eigenvalue {0:.3e})")]
    NonPositiveObservable(f64),

    #[error("operation requires an exact moment, got a Monte-Carlo moment over {0} samples")]
    MonteCarloProvenance(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
