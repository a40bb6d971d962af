use thiserror::Error;

/// Errors raised by the estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("matrix is ill-conditioned (condition number {cond:.3e} exceeds {limit:.1e})")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("leverage of sample {index} is {leverage}, leave-one-out fit is undefined")]
    DegenerateLeverage { index: usize, leverage: f64 },

    #[error("quadratic-form moments are not positive semidefinite: {0}")]
    DegenerateMoments(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{count} coefficients exceed the active-set enumeration limit of {limit}")]
    TooManyTargets { count: usize, limit: usize },

    #[error("target {index} has trace {target_trace}, expected {expected_trace}")]
    TraceMismatch {
        index: usize,
        target_trace: f64,
        expected_trace: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
