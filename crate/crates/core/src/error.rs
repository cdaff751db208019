use thiserror::Error;

/// Errors raised by the solver and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("degenerate applied field: |sin(HpL)| = {0:e} < 1e-9")]
    DegenerateField(f64),
    #[error("singular Hessian (pivot ratio {0:e})")]
    SingularHessian(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("factorization failure: {0}")]
    FactorizationFailure(String),
    #[error("no complete Josephson-current cycle inside the sample")]
    NoCompleteCycle,
    #[error("outside the domain of the formula: {0}")]
    DomainError(String),
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LdError>;
