use nalgebra::{DMatrix, SymmetricEigen};

use super::{c, C64};

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The input is scaled by `2^-s` until its 1-norm is at most 1/4, the series
/// is summed until the next term no longer changes the sum in double
/// precision, and the result is squared `s` times.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.25 {
        squarings = (norm1 / 0.25).log2().ceil() as u32;
    }
    let scaled = a * c(0.5f64.powi(squarings as i32), 0.0);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        result += &term;
        if term.norm() <= 1e-18 * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the lower triangle is trusted by the underlying solver, so the input
/// is symmetrized first.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, scale: f64, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&m + m.adjoint()) * c(scale, 0.0)
    }

    #[test]
    fn expm_matches_spectral_route() {
        for (seed, scale) in [(1, 0.1), (2, 1.0), (3, 7.0)] {
            let h = random_hermitian(12, scale, seed);
            let (vals, vecs) = hermitian_eigen(&h);
            let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                vals.len(),
                vals.iter().map(|&l| (c(0.0, l)).exp()),
            ));
            let oracle = &vecs * phases * vecs.adjoint();
            let got = expm(&(h * c(0.0, 1.0)));
            assert!((got - &oracle).norm() < 1e-11 * oracle.norm(), "seed {seed}");
        }
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let mut n = DMatrix::<C64>::zeros(3, 3);
        n[(0, 1)] = c(2.0, 0.0);
        n[(1, 2)] = c(3.0, 0.0);
        let e = expm(&n);
        assert!((e[(0, 2)] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let h = random_hermitian(9, 1.0, 5);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let gram = vecs.adjoint() * &vecs;
        assert!((gram - DMatrix::<C64>::identity(9, 9)).norm() < 1e-12);
        let recon = &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(9, vals.iter().map(|&v| c(v, 0.0)))) * vecs.adjoint();
        assert!((recon - h).norm() < 1e-12);
    }
}
