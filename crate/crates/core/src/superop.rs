//! Row-major vectorization of 4×4 operators and the 16×16 superoperators acting on them.
//!
//! `vec(ρ)[4·i + j] = ρ[i, j]`. Under this convention
//! `vec(A·X·B) = (A ⊗ Bᵀ)·vec(X)`, which every superoperator in the crate uses.

use nalgebra::{Dim, Matrix, Matrix4, RawStorage, SMatrix, SVector};
use num_complex::Complex64;

pub const DIM: usize = 4;
pub const VEC_DIM: usize = DIM * DIM;

pub type Operator = Matrix4<Complex64>;
pub type Superop = SMatrix<Complex64, VEC_DIM, VEC_DIM>;
pub type OpVector = SVector<Complex64, VEC_DIM>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub const fn vec_index(row: usize, col: usize) -> usize {
    DIM * row + col
}

pub fn vectorize(op: &Operator) -> OpVector {
    OpVector::from_fn(|k, _| op[(k / DIM, k % DIM)])
}

pub fn unvectorize(v: &OpVector) -> Operator {
    Operator::from_fn(|i, j| v[vec_index(i, j)])
}

/// Superoperator of `X ↦ A·X`.
pub fn left_multiplication(a: &Operator) -> Superop {
    Superop::from_fn(|r, c| {
        let (i, j) = (r / DIM, r % DIM);
        let (k, l) = (c / DIM, c % DIM);
        if j == l {
            a[(i, k)]
        } else {
            ZERO
        }
    })
}

/// Superoperator of `X ↦ X·B`.
pub fn right_multiplication(b: &Operator) -> Superop {
    Superop::from_fn(|r, c| {
        let (i, j) = (r / DIM, r % DIM);
        let (k, l) = (c / DIM, c % DIM);
        if i == k {
            b[(l, j)]
        } else {
            ZERO
        }
    })
}

/// Superoperator of `X ↦ -i[H, X]`.
pub fn commutator_superop(h: &Operator) -> Superop {
    (left_multiplication(h) - right_multiplication(h)) * (-I)
}

/// Lindblad dissipator `ρ ↦ c·ρ·c† − ½{c†c, ρ}`.
pub fn lindblad_dissipator(c: &Operator) -> Superop {
    let cd = c.adjoint();
    let n = cd * c;
    left_multiplication(c) * right_multiplication(&cd)
        - (left_multiplication(&n) + right_multiplication(&n)) * Complex64::new(0.5, 0.0)
}

/// Row vector `t` with `t·vec(X) = Tr X`.
pub fn trace_functional() -> SMatrix<Complex64, 1, VEC_DIM> {
    SMatrix::<Complex64, 1, VEC_DIM>::from_fn(|_, c| if c / DIM == c % DIM { ONE } else { ZERO })
}

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxNorm {
    fn max_norm(&self) -> f64;
}

impl<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>> MaxNorm for Matrix<Complex64, R, C, S> {
    fn max_norm(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn max_abs(op: &Operator) -> f64 {
    op.max_norm()
}

pub fn hermiticity_error(op: &Operator) -> f64 {
    max_abs(&(op - op.adjoint()))
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// Infinity norm (max absolute row sum).
pub fn superop_inf_norm(l: &Superop) -> f64 {
    l.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
