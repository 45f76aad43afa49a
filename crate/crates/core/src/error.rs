use thiserror::Error;

use crate::model::FieldName;

/// Errors raised while assembling Hamiltonians and decay operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("expected field {expected}, got {found}")]
    WrongField { expected: FieldName, found: FieldName },
    #[error("field {field}: {reason}")]
    InvalidLegs { field: FieldName, reason: String },
    #[error("field {field} must be {expected}-propagating")]
    WrongDirection { field: FieldName, expected: &'static str },
    #[error("assembled Hamiltonian is not Hermitian (max deviation {deviation:e} MHz)")]
    NonHermitian { deviation: f64 },
    #[error("probe Hamiltonian carries diagonal content ({magnitude:e} MHz); only L3 couplings are allowed")]
    DiagonalProbe { magnitude: f64 },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

/// Errors raised by the linear-algebra solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(
        "constrained steady-state system is singular (pivot ratio {pivot_ratio:e}); \
         this usually means a dark-state degeneracy; raise decay.gamma_ground above zero"
    )]
    SingularSystem { pivot_ratio: f64 },
    #[error("base state is not a steady state of the Liouvillian (residual {residual:e} MHz)")]
    InvalidBaseState { residual: f64 },
    #[error("time step {dt} too large: dt·‖L‖∞ = {product} must stay below 0.1")]
    StepTooLarge { dt: f64, product: f64 },
    #[error("solution violates {what} (value {value:e})")]
    InvariantViolated { what: &'static str, value: f64 },
}

/// Any failure while evaluating a single grid point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
