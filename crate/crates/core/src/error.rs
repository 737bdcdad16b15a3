use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid pulse: width must be positive, got {0}")]
    InvalidPulse(f64),

    #[error("chain too short for bound state: boundary tail e^(-beta N) = {tail:.3e} >= {tol:.3e}")]
    TruncationTooCoarse { tail: f64, tol: f64 },

    #[error("scattering momentum k = {0} is singular (sin k = 0)")]
    SingularK(f64),

    #[error("operator is not Hermitian: |A[{row},{col}] - conj(A[{col},{row}])| = {defect:.3e}")]
    NotHermitian { row: usize, col: usize, defect: f64 },

    #[error("propagator failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("dimension {dim} exceeds dense cap {cap}")]
    DimTooLarge { dim: usize, cap: usize },

    #[error("observation window ends at t = {requested}, after first boundary return at t = {limit}")]
    WindowTooLong { requested: f64, limit: f64 },

    #[error("Gram matrix ill-conditioned (cond = {0:.3e})")]
    IllConditioned(f64),

    #[error("invariant `{name}` violated: {detail}")]
    InvariantViolation { name: String, detail: String },

    #[error("config field `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::BasisMismatch(_) => "BASIS_MISMATCH",
            Error::InvalidPulse(_) => "INVALID_PULSE",
            Error::TruncationTooCoarse { .. } => "TRUNCATION_TOO_COARSE",
            Error::SingularK(_) => "SINGULAR_K",
            Error::NotHermitian { .. } => "NOT_HERMITIAN",
            Error::ConvergenceFailure(_) => "CONVERGENCE_FAILURE",
            Error::DimTooLarge { .. } => "DIM_TOO_LARGE",
            Error::WindowTooLong { .. } => "WINDOW_TOO_LONG",
            Error::IllConditioned(_) => "ILL_CONDITIONED",
            Error::InvariantViolation { .. } => "INVARIANT_VIOLATION",
            Error::Validation { .. } => "VALIDATION",
        }
    }

    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure(_)
                | Error::NotHermitian { .. }
                | Error::IllConditioned(_)
                | Error::InvariantViolation { .. }
        )
    }
}
