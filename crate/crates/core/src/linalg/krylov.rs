//! Lanczos iterations on Hermitian operators given only as matrix-vector
//! products.
//!
//! Both routines keep the full Krylov basis and reorthogonalize twice per
//! step; the spaces involved here are at most a few hundred vectors, and the
//! identities being checked need residuals near machine precision.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, c, dot, norm, normalize, LinalgError, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Stop when `‖A x − θ x‖ ≤ tol · max(1, |θ|)`.
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_krylov: 300, max_restarts: 50, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for v in basis {
            let proj = dot(v, w);
            axpy(-proj, v, w);
        }
    }
}

fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn start_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Extremal eigenpair of a Hermitian operator, restricted to the orthogonal
/// complement of `locked` (deflation of already-found eigenvectors).
pub fn lanczos_extremal<F>(
    mut apply: F,
    dim: usize,
    locked: &[Vec<C64>],
    which: Which,
    opts: &LanczosOptions,
) -> Result<LanczosPair, LinalgError>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let mut v0 = start_vector(dim, opts.seed);
    orthogonalize(&mut v0, locked);
    if normalize(&mut v0) < 1e-12 {
        return Err(LinalgError::EmptyKrylovSpace);
    }
    let max_krylov = opts.max_krylov.min(dim.saturating_sub(locked.len())).max(1);
    let mut w = vec![C64::default(); dim];
    let mut total_iterations = 0;
    let mut last_residual = f64::INFINITY;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![v0.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut best: Option<(f64, Vec<f64>)> = None;

        for j in 0..max_krylov {
            total_iterations += 1;
            apply(&basis[j], &mut w);
            orthogonalize(&mut w, locked);
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);

            let exhausted = j + 1 == max_krylov || beta <= 1e-14 * alpha.abs().max(1.0);
            if !(exhausted || j < 10 || j % 5 == 4) {
                betas.push(beta);
                let mut next = w.clone();
                super::scale_in_place(c(1.0 / beta, 0.0), &mut next);
                basis.push(next);
                continue;
            }
            let (vals, vecs) = tridiagonal_eigen(&alphas, &betas);
            let k = match which {
                Which::Smallest => (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])),
                Which::Largest => (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])),
            }
            .expect("nonempty tridiagonal");
            let theta = vals[k];
            let y: Vec<f64> = vecs.column(k).iter().copied().collect();
            let estimate = beta * y[y.len() - 1].abs();
            best = Some((theta, y));
            if estimate <= opts.tol * theta.abs().max(1.0) || exhausted {
                break;
            }
            betas.push(beta);
            let mut next = w.clone();
            super::scale_in_place(c(1.0 / beta, 0.0), &mut next);
            basis.push(next);
        }

        let (_, y) = best.expect("at least one Lanczos step");
        let mut x = vec![C64::default(); dim];
        for (coef, v) in y.iter().zip(&basis) {
            axpy(c(*coef, 0.0), v, &mut x);
        }
        orthogonalize(&mut x, locked);
        normalize(&mut x);
        apply(&x, &mut w);
        orthogonalize(&mut w, locked);
        let value = dot(&x, &w).re;
        axpy(c(-value, 0.0), &x, &mut w);
        let residual = norm(&w);
        if residual <= opts.tol * value.abs().max(1.0) || max_krylov >= dim - locked.len() {
            return Ok(LanczosPair { value, vector: x, residual, iterations: total_iterations });
        }
        if (last_residual - residual).abs() <= 1e-3 * residual && residual <= 1e3 * opts.tol {
            return Ok(LanczosPair { value, vector: x, residual, iterations: total_iterations });
        }
        last_residual = residual;
        v0 = x;
    }
    Err(LinalgError::NoConvergence { iterations: total_iterations, residual: last_residual })
}

/// `exp(i·theta·H)·v` for Hermitian `H` given as a matrix-vector product.
///
/// The time interval is split adaptively so that each Lanczos projection
/// meets `tol` (relative to `‖v‖`) by the standard a-posteriori estimate.
pub fn expm_i_hermitian_action<F>(
    mut apply: F,
    dim: usize,
    theta: f64,
    v: &[C64],
    tol: f64,
) -> Vec<C64>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let max_krylov = dim.min(60);
    let mut state = v.to_vec();
    let mut remaining = theta;
    let mut w = vec![C64::default(); dim];
    let mut guard = 0;
    while remaining != 0.0 {
        guard += 1;
        assert!(guard < 100_000, "Krylov exponential made no progress");
        let scale = norm(&state);
        if scale == 0.0 {
            return state;
        }
        let mut q0 = state.clone();
        normalize(&mut q0);
        let mut basis = vec![q0];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut breakdown = false;
        let mut last_beta = 0.0;
        for j in 0..max_krylov {
            apply(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);
            last_beta = beta;
            if beta <= 1e-13 * alpha.abs().max(1.0) {
                breakdown = true;
                break;
            }
            if j + 1 == max_krylov {
                break;
            }
            betas.push(beta);
            let mut next = w.clone();
            super::scale_in_place(c(1.0 / beta, 0.0), &mut next);
            basis.push(next);
        }
        let m = alphas.len();
        let (vals, vecs) = tridiagonal_eigen(&alphas, &betas[..m - 1]);
        let coefficients = |tau: f64| -> Vec<C64> {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|k| c(vecs[(i, k)] * vecs[(0, k)], 0.0) * c(0.0, tau * vals[k]).exp())
                        .sum()
                })
                .collect()
        };
        let mut tau = remaining;
        let mut coeffs = coefficients(tau);
        if !breakdown && m == max_krylov {
            while last_beta * coeffs[m - 1].norm() > tol * (tau / theta).abs() {
                tau *= 0.5;
                coeffs = coefficients(tau);
            }
        }
        let mut next = vec![C64::default(); dim];
        for (coef, q) in coeffs.iter().zip(&basis) {
            axpy(*coef * scale, q, &mut next);
        }
        state = next;
        remaining -= tau;
        if remaining.abs() <= 1e-15 * theta.abs() {
            remaining = 0.0;
        }
    }
    state
}
