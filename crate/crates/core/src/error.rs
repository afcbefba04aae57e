use thiserror::Error;

/// Errors raised by geometry construction, operators, solvers and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has non-finite entries")]
    NonFinite,

    #[error("empty vector: ambient dimension must be at least 1")]
    EmptyVector,

    #[error("normal vector has zero norm")]
    ZeroNormal,

    #[error("basis is not orthonormal (drift {drift:.3e})")]
    NotOrthonormal { drift: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("constraint system is infeasible (residual {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("step size undefined: zero denominator")]
    DegenerateStep,

    #[error("non-finite iterate at iteration {iteration}")]
    NumericalFailure { iteration: usize },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
