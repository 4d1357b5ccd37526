//! Numerical linear algebra used by every other module.
//!
//! Operators live in a compressed-sparse-row container ([`OperatorMatrix`]).
//! Dense work (Hermitian eigensolves, matrix exponentials) goes through
//! `nalgebra`; the Krylov routines work directly on matrix-vector products so
//! that they scale past the dense limits.

mod dense;
mod krylov;
mod sparse;

pub use dense::{expm, hermitian_eigen};
pub use krylov::{
    expm_i_hermitian_action, lanczos_extremal, LanczosOptions, LanczosPair, Which,
};
pub use sparse::{OpNorms, OperatorFlags, OperatorMatrix};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Largest dimension for which a full dense exponential is formed.
pub const DENSE_EXP_LIMIT: usize = 1024;

/// Largest restricted dimension handed to the dense eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dense exponential refused for dimension {dim} (limit {limit}); use the Krylov action")]
    DenseLimit { dim: usize, limit: usize },
    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no search direction left: the deflated space is empty")]
    EmptyKrylovSpace,
}

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `⟨x|y⟩` with the conjugate on the left.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |acc, a| acc + a.norm_sqr()).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale_in_place(alpha: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Normalizes `x` in place and returns its former norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale_in_place(c(1.0 / n, 0.0), x);
    }
    n
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}
