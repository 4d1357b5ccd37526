use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::Serialize;

use super::{c, dense, krylov, LinalgError, C64, DENSE_EXP_LIMIT};

/// Structural claims attached by the builder of an operator.
///
/// The flags are promises, not cached facts: [`OperatorMatrix::verify_flags`]
/// re-checks each one against the entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OperatorFlags {
    pub hermitian: bool,
    pub unitary: bool,
    pub diagonal: bool,
}

impl OperatorFlags {
    pub const HERMITIAN: Self = Self { hermitian: true, unitary: false, diagonal: false };
    pub const UNITARY: Self = Self { hermitian: false, unitary: true, diagonal: false };
    pub const HERMITIAN_DIAGONAL: Self = Self { hermitian: true, unitary: false, diagonal: true };
    pub const UNITARY_DIAGONAL: Self = Self { hermitian: false, unitary: true, diagonal: true };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpNorms {
    pub frobenius: f64,
    pub spectral: f64,
}

/// Square complex matrix in CSR layout. Column indices are sorted within
/// each row and exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
    flags: OperatorFlags,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indptr: vec![0; dim + 1], indices: Vec::new(), data: Vec::new(), flags: OperatorFlags::HERMITIAN_DIAGONAL }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(vec![c(1.0, 0.0); dim]).with_flags(OperatorFlags {
            hermitian: true,
            unitary: true,
            diagonal: true,
        })
    }

    pub fn from_diagonal(values: Vec<C64>) -> Self {
        let dim = values.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::with_capacity(dim);
        let mut data = Vec::with_capacity(dim);
        indptr.push(0);
        for (i, v) in values.into_iter().enumerate() {
            if v != C64::default() {
                indices.push(i);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, data, flags: OperatorFlags { diagonal: true, ..Default::default() } }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self::from_diagonal(values.iter().map(|&v| c(v, 0.0)).collect())
            .with_flags(OperatorFlags::HERMITIAN_DIAGONAL)
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, col, v) in triplets {
            assert!(r < dim && col < dim, "triplet ({r}, {col}) outside dimension {dim}");
            rows[r].push((col, v));
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut acc = C64::default();
                while k < row.len() && row[k].0 == col {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != C64::default() {
                    indices.push(col);
                    data.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, data, flags: OperatorFlags::default() }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let dim = m.nrows();
        let triplets = (0..dim).flat_map(|r| (0..dim).map(move |col| (r, col, m[(r, col)])));
        Self::from_triplets(dim, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, col, v) in self.iter() {
            m[(r, col)] = v;
        }
        m
    }

    pub fn with_flags(mut self, flags: OperatorFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(col, v)| (r, col, v)))
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&col) {
            Ok(k) => self.data[span.start + k],
            Err(_) => C64::default(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, col, _)| r == col)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(r, col, v)| (col, r, v.conj()));
        Self::from_triplets(self.dim, triplets).with_flags(self.flags)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        if alpha == C64::default() {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= alpha;
        }
        out.flags = OperatorFlags { diagonal: self.flags.diagonal, hermitian: self.flags.hermitian && alpha.im == 0.0, unitary: false };
        out
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(c(alpha, 0.0))
    }

    /// `alpha * self + beta * other`
    pub fn linear_combination(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in operator sum");
        let mut indptr = Vec::with_capacity(self.dim + 1);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        indptr.push(0);
        for r in 0..self.dim {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                let (col, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ca, va)), None) => {
                        a.next();
                        (ca, alpha * va)
                    }
                    (None, Some(&(cb, vb))) => {
                        b.next();
                        (cb, beta * vb)
                    }
                    (Some(&(ca, va)), Some(&(cb, vb))) => {
                        if ca < cb {
                            a.next();
                            (ca, alpha * va)
                        } else if cb < ca {
                            b.next();
                            (cb, beta * vb)
                        } else {
                            a.next();
                            b.next();
                            (ca, alpha * va + beta * vb)
                        }
                    }
                };
                if v != C64::default() {
                    indices.push(col);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { dim: self.dim, indptr, indices, data, flags: OperatorFlags::default() }
    }

    /// Sparse product (Gustavson's row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in operator product");
        let dim = self.dim;
        let mut acc = vec![C64::default(); dim];
        let mut stamp = vec![usize::MAX; dim];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            cols.clear();
            for (k, a) in self.row(r) {
                for (col, b) in other.row(k) {
                    if stamp[col] != r {
                        stamp[col] = r;
                        acc[col] = C64::default();
                        cols.push(col);
                    }
                    acc[col] += a * b;
                }
            }
            cols.sort_unstable();
            for &col in &cols {
                if acc[col] != C64::default() {
                    indices.push(col);
                    data.push(acc[col]);
                }
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, data, flags: OperatorFlags::default() }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other) - other.matmul(self)
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.matmul(other) + other.matmul(self)
    }

    /// Kronecker product `self ⊗ other`; `self` indexes the slow digit.
    pub fn kron(&self, other: &Self) -> Self {
        let d2 = other.dim;
        let triplets = self.iter().flat_map(|(r1, c1, a)| {
            other.iter().map(move |(r2, c2, b)| (r1 * d2 + r2, c1 * d2 + c2, a * b))
        });
        Self::from_triplets(self.dim * d2, triplets)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim, "vector length does not match operator");
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(col, v)| v * x[col]).sum();
        }
    }

    /// `⟨x|M|x⟩`
    pub fn expectation(&self, x: &[C64]) -> C64 {
        super::dot(x, &self.matvec(x))
    }

    /// `⟨x|M|y⟩`
    pub fn matrix_element(&self, x: &[C64], y: &[C64]) -> C64 {
        super::dot(x, &self.matvec(y))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc + v.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value, from Lanczos on `M†M`.
    pub fn spectral_norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        if self.is_diagonal() {
            return self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let adj = self.adjoint();
        let mut mx = vec![C64::default(); self.dim];
        let apply = |x: &[C64], y: &mut [C64]| {
            self.matvec_into(x, &mut mx);
            adj.matvec_into(&mx, y);
        };
        let opts = krylov::LanczosOptions { tol: 1e-13, ..Default::default() };
        let pair = krylov::lanczos_extremal(apply, self.dim, &[], krylov::Which::Largest, &opts)
            .expect("Lanczos on a positive semidefinite operator");
        pair.value.max(0.0).sqrt()
    }

    pub fn norms(&self) -> OpNorms {
        OpNorms { frobenius: self.frobenius_norm(), spectral: self.spectral_norm() }
    }

    /// `‖M − M†‖_F`
    pub fn hermiticity_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// `‖M†M − I‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint().matmul(self) - &Self::identity(self.dim)).frobenius_norm()
    }

    /// Re-checks every flagged property and returns the worst residual per
    /// failing flag.
    pub fn verify_flags(&self, tol: f64) -> Result<(), Vec<(&'static str, f64)>> {
        let mut failures = Vec::new();
        if self.flags.hermitian {
            let r = self.hermiticity_residual();
            if !(r <= tol) {
                failures.push(("hermitian", r));
            }
        }
        if self.flags.unitary {
            let r = self.unitarity_residual();
            if !(r <= tol) {
                failures.push(("unitary", r));
            }
        }
        if self.flags.diagonal && !self.is_diagonal() {
            failures.push(("diagonal", 1.0));
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(failures)
        }
    }

    /// `exp(i·theta·M)` for Hermitian `M`.
    ///
    /// Diagonal generators are exponentiated entrywise. Otherwise the dense
    /// scaling-and-squaring path is used up to [`DENSE_EXP_LIMIT`].
    pub fn exp_i_hermitian(&self, theta: f64) -> Result<Self, LinalgError> {
        if self.is_diagonal() {
            let diag = self
                .diagonal()
                .into_iter()
                .map(|d| (c(0.0, theta) * d).exp())
                .collect();
            return Ok(Self::from_diagonal(diag).with_flags(OperatorFlags::UNITARY_DIAGONAL));
        }
        if self.dim > DENSE_EXP_LIMIT {
            return Err(LinalgError::DenseLimit { dim: self.dim, limit: DENSE_EXP_LIMIT });
        }
        let generator = self.to_dense() * c(0.0, theta);
        Ok(Self::from_dense(&dense::expm(&generator)).with_flags(OperatorFlags::UNITARY))
    }

    /// Dense block `M[indices, indices]`.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<C64> {
        let mut position = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }
        let n = indices.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &i) in indices.iter().enumerate() {
            for (col, v) in self.row(i) {
                let p = position[col];
                if p != usize::MAX {
                    m[(k, p)] = v;
                }
            }
        }
        m
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.linear_combination(c(1.0, 0.0), rhs, c(1.0, 0.0))
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        &self + &rhs
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.linear_combination(c(1.0, 0.0), rhs, c(-1.0, 0.0))
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        &self - &rhs
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(dim: usize, fill: f64, seed: u64) -> OperatorMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for r in 0..dim {
            for col in 0..dim {
                if rng.gen::<f64>() < fill {
                    t.push((r, col, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        OperatorMatrix::from_triplets(dim, t)
    }

    fn random_hermitian(dim: usize, seed: u64) -> OperatorMatrix {
        let m = random_sparse(dim, 0.6, seed);
        (&m + &m.adjoint()).with_flags(OperatorFlags::HERMITIAN)
    }

    #[test]
    fn products_match_dense() {
        let a = random_sparse(9, 0.3, 1);
        let b = random_sparse(9, 0.4, 2);
        let diff = (a.matmul(&b).to_dense() - a.to_dense() * b.to_dense()).norm();
        assert!(diff < 1e-13);
        let sum = (a.linear_combination(c(2.0, 1.0), &b, c(0.0, -3.0)).to_dense()
            - (a.to_dense() * c(2.0, 1.0) + b.to_dense() * c(0.0, -3.0)))
        .norm();
        assert!(sum < 1e-13);
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = random_sparse(3, 0.7, 3);
        let b = random_sparse(4, 0.7, 4);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 12);
        for r in 0..12 {
            for col in 0..12 {
                let expected = a.get(r / 4, col / 4) * b.get(r % 4, col % 4);
                assert!((k.get(r, col) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn norms_of_zero_and_identity() {
        let z = OperatorMatrix::zeros(5);
        assert_eq!(z.norms(), OpNorms { frobenius: 0.0, spectral: 0.0 });
        let id = OperatorMatrix::identity(7);
        let n = id.norms();
        assert!((n.frobenius - 7f64.sqrt()).abs() < 1e-15);
        assert!((n.spectral - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_norm_matches_dense_eigensolve() {
        for seed in 0..5 {
            let h = random_hermitian(8, 100 + seed);
            let (vals, _) = dense::hermitian_eigen(&h.to_dense());
            let oracle = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let s = h.spectral_norm();
            assert!((s - oracle).abs() <= 1e-8 * oracle, "{s} vs {oracle}");
        }
    }

    #[test]
    fn spectral_norm_of_non_normal_matches_svd() {
        let m = random_sparse(10, 0.4, 77);
        let svd = m.to_dense().svd(false, false);
        let oracle = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        assert!((m.spectral_norm() - oracle).abs() <= 1e-8 * oracle);
    }

    #[test]
    fn exp_of_diagonal_is_exact_phase() {
        let d = OperatorMatrix::from_real_diagonal(&[0.0, 1.0, -2.5, 3.0]);
        let u = d.exp_i_hermitian(0.7).unwrap();
        assert!(u.is_diagonal());
        for (i, v) in u.diagonal().into_iter().enumerate() {
            assert!((v.norm() - 1.0).abs() < 1e-15, "entry {i}");
        }
        assert!(u.verify_flags(1e-14).is_ok());
    }

    #[test]
    fn flag_verification_catches_false_claims() {
        let m = random_sparse(6, 0.5, 9).with_flags(OperatorFlags::HERMITIAN);
        let err = m.verify_flags(1e-10).unwrap_err();
        assert_eq!(err[0].0, "hermitian");
    }

    #[test]
    fn restrict_extracts_block() {
        let m = random_sparse(6, 0.8, 11);
        let idx = [1, 4, 5];
        let block = m.restrict(&idx);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                assert_eq!(block[(a, b)], m.get(i, j));
            }
        }
    }
}
