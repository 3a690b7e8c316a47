use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("variable index must be at least 1 (offset {offset})")]
    ZeroVariableIndex { offset: usize },

    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("division by zero during evaluation")]
    DivisionByZero,

    #[error("non-finite intermediate value during evaluation")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("expression is not real-valued (max imaginary part {max_imag:e})")]
    NotRealValued { max_imag: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("gradient norm {norm:e} below floor {floor:e} (degenerate boundary point)")]
    DegenerateGradient { norm: f64, floor: f64 },

    #[error("b and c are numerically dependent")]
    DependentVectors,

    #[error("point lies off the affine plane (residual {residual:e})")]
    OffPlane { residual: f64 },

    #[error("boundary projection did not converge (|rho| = {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("boundary not found: only {found} of {requested} samples converged")]
    BoundaryNotFound { found: usize, requested: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no interior point found along the complex normal after {halvings} halvings")]
    BacktrackExhausted { halvings: usize },

    #[error("certificate invariant violated: {quantity} = {value:e}")]
    InvariantViolation { quantity: String, value: f64 },

    #[error("containment could not be verified after {halvings} radius halvings")]
    ContainmentUnverifiable { halvings: usize },
}
