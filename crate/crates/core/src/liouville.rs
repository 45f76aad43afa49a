//! Vectorized master equation, steady-state solver and a fixed-step RK4 oracle.

use nalgebra::SVector;
use num_complex::Complex64;

use crate::error::SolverError;
use crate::model::{DecaySuperop, Hamiltonian, Level};
use crate::superop::{
    commutator_superop, hermiticity_error, superop_inf_norm, trace_functional, unvectorize,
    vectorize, MaxNorm, OpVector, Operator, Superop, ONE, VEC_DIM,
};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Bound on `‖L·vec(ρ)‖∞` accepted as a steady state, MHz.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Smallest accepted ratio of the extreme LU pivots of the constrained system.
pub const PIVOT_RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Operator,
}

impl DensityMatrix {
    pub fn new(matrix: Operator) -> Result<Self, SolverError> {
        let herm = hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(SolverError::InvariantViolated {
                what: "density matrix Hermiticity",
                value: herm,
            });
        }
        let trace_err = (matrix.trace() - ONE).norm();
        if trace_err > TRACE_TOL {
            return Err(SolverError::InvariantViolated {
                what: "unit trace",
                value: trace_err,
            });
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -POSITIVITY_TOL {
            return Err(SolverError::InvariantViolated {
                what: "positivity",
                value: min_eig,
            });
        }
        Ok(Self { matrix })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(p: [f64; 4]) -> Result<Self, SolverError> {
        Self::new(Operator::from_diagonal(&p.map(|x| Complex64::new(x, 0.0)).into()))
    }

    /// Unpolarized ground mixture, no excited population.
    pub fn ground_mixture() -> Self {
        Self::from_populations([0.5, 0.5, 0.0, 0.0]).expect("valid state")
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator {
        self.matrix
    }

    pub fn population(&self, level: Level) -> f64 {
        self.matrix[(level.index(), level.index())].re
    }

    pub fn excited_population(&self) -> f64 {
        Level::EXCITED.iter().map(|&e| self.population(e)).sum()
    }

    pub fn coherence(&self, row: Level, col: Level) -> Complex64 {
        self.matrix[(row.index(), col.index())]
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (self.matrix - other).max_norm()
    }
}

pub fn min_eigenvalue(m: &Operator) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

/// Generator `L` with `d vec(ρ)/dt = L·vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: Superop,
}

impl Liouvillian {
    pub fn from_matrix(matrix: Superop) -> Self {
        Self { matrix }
    }

    pub fn zero() -> Self {
        Self {
            matrix: Superop::zeros(),
        }
    }

    pub fn matrix(&self) -> &Superop {
        &self.matrix
    }

    /// Adds an extra dissipative or coherent fragment.
    pub fn plus(&self, fragment: &Superop) -> Self {
        Self {
            matrix: self.matrix + fragment,
        }
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    /// `max |t·L|` for the trace functional `t`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        (trace_functional() * self.matrix).max_norm()
    }

    pub fn residual(&self, rho: &Operator) -> f64 {
        (self.matrix * vectorize(rho)).max_norm()
    }

    pub fn inf_norm(&self) -> f64 {
        superop_inf_norm(&self.matrix)
    }
}

pub fn assemble_liouvillian(h0: &Hamiltonian, decay: &DecaySuperop) -> Liouvillian {
    Liouvillian {
        matrix: commutator_superop(h0.matrix()) + decay.matrix(),
    }
}

/// Solves `A·x = b` where `A` is `matrix` with row 0 replaced by the trace
/// functional and `b[0] = trace`.
///
/// A single step of iterative refinement is applied to the LU solution.
pub(crate) fn solve_trace_constrained(
    matrix: &Superop,
    rhs: &OpVector,
    trace: Complex64,
) -> Result<OpVector, SolverError> {
    let mut a = *matrix;
    a.set_row(0, &trace_functional());
    let mut b = *rhs;
    b[0] = trace;

    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..VEC_DIM {
        let p = u[(k, k)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if pivot_ratio.is_nan() || pivot_ratio <= PIVOT_RATIO_TOL {
        return Err(SolverError::SingularSystem { pivot_ratio });
    }
    let mut x = lu.solve(&b).ok_or(SolverError::SingularSystem { pivot_ratio })?;
    let r: SVector<Complex64, VEC_DIM> = b - a * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x)
}

pub fn steady_state(liouvillian: &Liouvillian) -> Result<DensityMatrix, SolverError> {
    let x = solve_trace_constrained(liouvillian.matrix(), &OpVector::zeros(), ONE)?;
    let rho = unvectorize(&x);
    let residual = liouvillian.residual(&rho);
    if residual > RESIDUAL_TOL {
        return Err(SolverError::InvariantViolated {
            what: "steady-state residual",
            value: residual,
        });
    }
    DensityMatrix::new(rho)
}

/// Classic fourth-order Runge–Kutta with fixed step `≤ dt` covering `duration` exactly.
///
/// For a linear generator one RK4 step is the matrix polynomial
/// `P = I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`; `n` steps are applied as `Pⁿ`
/// by repeated squaring.
pub fn time_evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    duration: f64,
    dt: f64,
) -> Result<DensityMatrix, SolverError> {
    if !(dt > 0.0 && dt.is_finite()) || !(duration >= 0.0 && duration.is_finite()) {
        return Err(SolverError::StepTooLarge {
            dt,
            product: f64::NAN,
        });
    }
    let product = dt * liouvillian.inf_norm();
    if product >= 0.1 {
        return Err(SolverError::StepTooLarge { dt, product });
    }
    if duration == 0.0 {
        return Ok(rho0.clone());
    }
    let steps = (duration / dt).ceil().max(1.0) as u64;
    let h = Complex64::new(duration / steps as f64, 0.0);

    let hl = liouvillian.matrix() * h;
    let hl2 = hl * hl;
    let hl3 = hl2 * hl;
    let hl4 = hl3 * hl;
    let step: Superop = Superop::identity()
        + hl
        + hl2 * Complex64::new(0.5, 0.0)
        + hl3 * Complex64::new(1.0 / 6.0, 0.0)
        + hl4 * Complex64::new(1.0 / 24.0, 0.0);

    let mut v = vectorize(rho0.matrix());
    let (mut power, mut n) = (step, steps);
    while n > 0 {
        if n & 1 == 1 {
            v = power * v;
        }
        n >>= 1;
        if n > 0 {
            power = power * power;
        }
    }
    let rho = unvectorize(&v);
    let drift = (rho.trace() - rho0.matrix().trace()).norm();
    if drift > 1e-8 {
        return Err(SolverError::InvariantViolated {
            what: "trace drift during time evolution",
            value: drift,
        });
    }
    let rho = rho / rho.trace();
    DensityMatrix::new(rho)
}
