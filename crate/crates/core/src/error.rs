use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsotError {
    #[error("matrix is not hermitian (‖H − H†‖_F = {residual:.3e}, allowed {allowed:.3e})")]
    NotHermitian { residual: f64, allowed: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("not a CPTP map: trace-preservation residual {tp_residual:.3e}, minimum Choi eigenvalue {min_choi_eigenvalue:.3e}")]
    InvalidChannel {
        tp_residual: f64,
        min_choi_eigenvalue: f64,
    },

    #[error(
        "fiducial does not generate a SIC-POVM: |Tr[P_{first} P_{second}] − 1/4| = {deviation:.3e}"
    )]
    FailedOverlapCondition {
        first: usize,
        second: usize,
        deviation: f64,
    },

    #[error("basis is not orthogonal with equal norms (worst Gram deviation {deviation:.3e})")]
    BasisNotOrthogonal { deviation: f64 },

    #[error("basis element {index} is not a light-touch observable")]
    NotLightTouch { index: usize },

    #[error("linear system is rank deficient: rank {rank} of {expected}")]
    SingularSystem { rank: usize, expected: usize },

    #[error("observable is light-touch; no maximality counterexample exists")]
    IsLightTouch,

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, QsotError>;
