//! Exact symbolic computation of the fundamental differential invariants and
//! the characteristic Cartan connection of systems of third-order ODEs
//! `y_i''' = f_i(x, y, p, q)`.

// Index loops mirror the tensor notation; iterator rewrites obscure it.
#![allow(clippy::needless_range_loop)]

pub mod connection;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod invariants;
mod jets;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod report;
pub mod scalar;
pub mod system;
pub mod tensor;

pub use connection::{
    compute_connection, verify_residuals, ConnectionCoefficients, ResidualCheck, ResidualReport, StructuralFlags,
};
pub use error::{EvalError, KernelError, OracleError, ParseError, SystemError, TensorError};
pub use expr::{Expr, ExprKind, Func, Var};
pub use invariants::{
    compute_all, compute_hm1, compute_hx, compute_i2, compute_i4, compute_w2, compute_w3, is_trivializable,
    trivializability, InvariantSet, NumericInvariants, Verdict,
};
pub use oracle::{
    compare, fd_invariants, fd_partial, fd_total_derivative, richardson, Comparison, ExprRhs, FdConfig, FnRhs, JetFn,
    NumericRhs, Richardson,
};
pub use parse::{parse_expr, parse_system};
pub use rational::{equivalent, is_zero, normalize, zero_test, RationalForm, ZeroTest};
pub use report::{ConnectionReport, InvariantReport, NumericReport};
pub use scalar::{DoubleDouble, Scalar};
pub use system::{circles_system, trivial_system, JetPoint, OdeSystem};
pub use tensor::{traceless2, traceless3, Slot, Tensor2, Tensor3};
