use thiserror::Error;

/// Failures of the exact rational kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("division by an expression that normalizes to zero")]
    DivisionByZeroExpr,
}

/// Failures of floating-point evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("singular evaluation: {0}")]
    EvalSingular(String),
    #[error("jet point has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Failures while reading the system DSL.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("index out of range at {line}:{column}: `{name}` exceeds m = {m}")]
    IndexOutOfRange {
        line: usize,
        column: usize,
        name: String,
        m: usize,
    },
    #[error("system dimension m = {m} is too small (need m >= 2)")]
    DimensionTooSmall { m: usize },
    #[error("unknown function `{name}` at {line}:{column}")]
    UnknownFunction { line: usize, column: usize, name: String },
}

/// Errors raised when building a system outside the parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("system dimension m = {m} is too small (need m >= 2)")]
    DimensionTooSmall { m: usize },
    #[error("variable `{var}` exceeds system dimension m = {m}")]
    IndexOutOfRange { var: String, m: usize },
    #[error("right-hand side f{index}: {source}")]
    Singular { index: usize, source: KernelError },
}

/// Errors from tensor operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("tensor is not symmetric in its lower indices at ({i}, {j}, {k})")]
    NotSymmetric { i: usize, j: usize, k: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Errors from the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("singular evaluation: {0}")]
    EvalSingular(String),
    #[error("finite-difference stencil left the domain of the right-hand side: {0}")]
    StencilOutOfDomain(String),
    #[error("invalid finite-difference configuration: {0}")]
    InvalidConfig(String),
}

impl From<EvalError> for OracleError {
    fn from(e: EvalError) -> Self {
        OracleError::EvalSingular(e.to_string())
    }
}
