//! Gauss-law sector and the calibrated vacuum.
//!
//! In the electric basis every `G_i` is diagonal on product states, so the
//! physical sector is enumerated combinatorially: a product state is
//! physical iff `n_i − n_{i−1} = f_i − 1` at every site, where `n_l` is the
//! flux quantum on link `l` and `f_i ∈ {0,1,2}` the site occupation.
//!
//! In the oscillator basis the linear coupling does not commute with the
//! `G_i`, so the constraint is imposed energetically through
//! `H + λ·a·Σ_i G_i²` and every reported number carries the achieved
//! `⟨a·Σ G²⟩`.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    c, hermitian_eigen, lanczos_extremal, norm, LanczosOptions, LinalgError, OperatorFlags, OperatorMatrix, Which, C64,
    DENSE_EIGEN_LIMIT,
};
use crate::model::{build_model, Lattice, ModelOperators};

/// Levels closer than this to the ground level count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("no product state satisfies the Gauss constraint at sites 0..={site}; flux cutoff {flux_cutoff} too small")]
    EmptySector { site: usize, flux_cutoff: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectorMode {
    Exact,
    Penalty { lambda: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_EIGEN_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct PhysicalSector {
    pub mode: SectorMode,
    /// Basis states spanning the sector (all states in penalty mode).
    pub basis: Vec<usize>,
    pub projector: OperatorMatrix,
    pub dim_physical: usize,
    /// Penalty mode only: numerical kernel dimension of `a·Σ G²`, when small
    /// enough to diagonalize densely.
    pub gauss_kernel_dim: Option<usize>,
}

impl PhysicalSector {
    pub fn is_exact(&self) -> bool {
        self.mode == SectorMode::Exact
    }

    pub fn project(&self, v: &[C64]) -> Vec<C64> {
        self.projector.matvec(v)
    }

    fn embed(&self, restricted: &[C64], dim: usize) -> Vec<C64> {
        let mut full = vec![C64::default(); dim];
        for (&i, &v) in self.basis.iter().zip(restricted) {
            full[i] = v;
        }
        full
    }

    fn restrict_vector(&self, v: &[C64]) -> Vec<C64> {
        self.basis.iter().map(|&i| v[i]).collect()
    }
}

/// Electric-basis enumeration of the Gauss-law kernel.
pub fn enumerate_physical(lat: &Lattice) -> Result<Vec<usize>, ConstraintError> {
    let s = &lat.space;
    let n = lat.cfg.n_sites;
    let cutoff = lat.cfg.boson_basis.size_parameter() as i64;
    let satisfied = |index: usize, site: usize| -> bool {
        let flux = |l: usize| s.link_digit(index, l) as i64 - cutoff;
        let prev = (site + n - 1) % n;
        flux(site) - flux(prev) == s.site_occupation(index, site) as i64 - 1
    };
    let physical: Vec<usize> = (0..s.total_dim).filter(|&i| (0..n).all(|site| satisfied(i, site))).collect();
    if physical.is_empty() {
        let site = (0..n)
            .find(|&last| !(0..s.total_dim).any(|i| (0..=last).all(|site| satisfied(i, site))))
            .unwrap_or(n - 1);
        return Err(ConstraintError::EmptySector { site, flux_cutoff: cutoff as usize });
    }
    Ok(physical)
}

pub fn physical_projector(lat: &Lattice, model: &ModelOperators) -> Result<PhysicalSector, ConstraintError> {
    let dim = lat.space.total_dim;
    if lat.cfg.is_electric() {
        let basis = enumerate_physical(lat)?;
        let projector = OperatorMatrix::from_triplets(dim, basis.iter().map(|&i| (i, i, c(1.0, 0.0))))
            .with_flags(OperatorFlags::HERMITIAN_DIAGONAL);
        let dim_physical = basis.len();
        return Ok(PhysicalSector { mode: SectorMode::Exact, basis, projector, dim_physical, gauss_kernel_dim: None });
    }
    let gauss_kernel_dim = (dim <= DENSE_EIGEN_LIMIT).then(|| {
        let (vals, _) = hermitian_eigen(&model.gauss_penalty().to_dense());
        vals.iter().filter(|&&v| v.abs() < 1e-9).count()
    });
    Ok(PhysicalSector {
        mode: SectorMode::Penalty { lambda: lat.cfg.penalty_lambda },
        basis: (0..dim).collect(),
        projector: OperatorMatrix::identity(dim),
        dim_physical: dim,
        gauss_kernel_dim,
    })
}

/// Lowest `count` eigenpairs of `op` restricted to `basis`, ascending, with
/// vectors in restricted coordinates.
pub fn restricted_lowest(
    op: &OperatorMatrix,
    basis: &[usize],
    count: usize,
    method: EigenMethod,
) -> Result<(Vec<f64>, Vec<Vec<C64>>), ConstraintError> {
    let n = basis.len();
    let dense = match method {
        EigenMethod::Auto => n <= DENSE_EIGEN_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
    };
    if dense {
        let (vals, vecs) = hermitian_eigen(&op.restrict(basis));
        let take = count.min(n);
        let vectors = (0..take).map(|k| vecs.column(k).iter().copied().collect()).collect();
        let mut values = vals;
        values.truncate(take);
        return Ok((values, vectors));
    }
    let block = RestrictedOperator::new(op, basis);
    let mut values = Vec::new();
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    for _ in 0..count.min(n) {
        let pair = lanczos_extremal(|x, y| block.apply(x, y), n, &vectors, Which::Smallest, &LanczosOptions::default())?;
        values.push(pair.value);
        vectors.push(pair.vector);
    }
    Ok((values, vectors))
}

/// Sparse view of `P·op·P` in restricted coordinates.
struct RestrictedOperator {
    rows: Vec<Vec<(usize, C64)>>,
}

impl RestrictedOperator {
    fn new(op: &OperatorMatrix, basis: &[usize]) -> Self {
        let mut position = vec![usize::MAX; op.dim()];
        for (k, &i) in basis.iter().enumerate() {
            position[i] = k;
        }
        let rows = basis
            .iter()
            .map(|&i| op.row(i).filter(|(col, _)| position[*col] != usize::MAX).map(|(col, v)| (position[col], v)).collect())
            .collect();
        Self { rows }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (yr, row) in y.iter_mut().zip(&self.rows) {
            *yr = row.iter().map(|&(col, v)| v * x[col]).sum();
        }
    }
}

/// Deterministic representative of the span of `vectors`: the normalized
/// projection of the first basis vector with non-negligible weight, which
/// also fixes the phase (that component is real and positive).
pub fn canonical_representative(vectors: &[Vec<C64>]) -> Vec<C64> {
    let n = vectors[0].len();
    let weight = |j: usize| vectors.iter().map(|v| v[j].norm_sqr()).sum::<f64>();
    let j = (0..n).find(|&j| weight(j) > 1e-12).unwrap_or(0);
    let mut out = vec![C64::default(); n];
    for v in vectors {
        let coefficient = v[j].conj();
        for (o, x) in out.iter_mut().zip(v) {
            *o += coefficient * x;
        }
    }
    crate::linalg::normalize(&mut out);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct VacuumState {
    #[serde(skip)]
    pub vector: Vec<C64>,
    /// Ground energy before the shift, i.e. the calibrated `ε_R`.
    pub energy_pre_shift: f64,
    pub gauss_residuals: Vec<f64>,
    /// `‖(H_unshifted − ε_R)|Ω_vac⟩‖`
    pub eigen_residual: f64,
    /// Number of levels within [`DEGENERACY_GAP`] of the ground level.
    pub degeneracy: usize,
    pub mode: SectorMode,
    /// Penalty mode: achieved `⟨a·Σ G²⟩`.
    pub penalty_g2: Option<f64>,
}

impl VacuumState {
    pub fn is_degenerate(&self) -> bool {
        self.degeneracy > 1
    }
}

pub fn vacuum_state(model: &ModelOperators, sector: &PhysicalSector) -> Result<VacuumState, ConstraintError> {
    vacuum_state_with(model, sector, EigenMethod::Auto)
}

pub fn vacuum_state_with(model: &ModelOperators, sector: &PhysicalSector, method: EigenMethod) -> Result<VacuumState, ConstraintError> {
    let h_unshifted = model.hamiltonian_unshifted();
    let penalty = model.gauss_penalty();
    let (target, penalty_g2_needed) = match sector.mode {
        SectorMode::Exact => (h_unshifted.clone(), false),
        SectorMode::Penalty { lambda } => (&h_unshifted + &penalty.scale_real(lambda), true),
    };
    // a few levels are enough to detect a degenerate ground level
    let probe = 4.min(sector.dim_physical);
    let (values, vectors) = restricted_lowest(&target, &sector.basis, probe, method)?;
    let ground = values[0];
    let degenerate: Vec<Vec<C64>> = values
        .iter()
        .zip(&vectors)
        .filter(|(v, _)| (*v - ground).abs() < DEGENERACY_GAP)
        .map(|(_, vec)| vec.clone())
        .collect();
    let degeneracy = degenerate.len();
    let restricted = canonical_representative(&degenerate);
    let vector = sector.embed(&restricted, model.dim());

    let energy_pre_shift = match sector.mode {
        SectorMode::Exact => ground,
        SectorMode::Penalty { .. } => h_unshifted.expectation(&vector).re,
    };
    let mut residual = h_unshifted.matvec(&vector);
    crate::linalg::axpy(c(-energy_pre_shift, 0.0), &vector, &mut residual);
    let gauss_residuals = model.gauss.iter().map(|g| norm(&g.matvec(&vector))).collect();
    let penalty_g2 = penalty_g2_needed.then(|| penalty.expectation(&vector).re);
    Ok(VacuumState {
        vector,
        energy_pre_shift,
        gauss_residuals,
        eigen_residual: norm(&residual),
        degeneracy,
        mode: sector.mode,
        penalty_g2,
    })
}

/// First pass of the two-pass calibration: the vacuum energy of the
/// unshifted Hamiltonian, to be used as `ε_R` when rebuilding.
pub fn calibrate_epsilon_r(lat: &Lattice) -> Result<f64, ConstraintError> {
    let model = build_model(lat, 0.0);
    let sector = physical_projector(lat, &model)?;
    Ok(vacuum_state(&model, &sector)?.energy_pre_shift)
}

/// Both passes: calibrate `ε_R`, then rebuild the model with it.
pub fn calibrated_model(lat: &Lattice) -> Result<ModelOperators, ConstraintError> {
    Ok(build_model(lat, calibrate_epsilon_r(lat)?))
}

/// Dense matrix of `P`'s span, handy for cross-checks.
pub fn sector_basis_matrix(sector: &PhysicalSector, dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, sector.dim_physical);
    for (k, &i) in sector.basis.iter().enumerate() {
        m[(i, k)] = c(1.0, 0.0);
    }
    m
}

/// Restricted coordinates of a full-space vector.
pub fn to_sector(sector: &PhysicalSector, v: &[C64]) -> Vec<C64> {
    sector.restrict_vector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LatticeConfig;
    use crate::gauge::{ChiFunction, GaugeOperators};
    use crate::linalg::sub;

    fn calibrated(cfg: &LatticeConfig) -> (Lattice, ModelOperators, PhysicalSector, VacuumState) {
        let lat = Lattice::new(cfg).unwrap();
        let eps = calibrate_epsilon_r(&lat).unwrap();
        let model = build_model(&lat, eps);
        let sector = physical_projector(&lat, &model).unwrap();
        let vac = vacuum_state(&model, &sector).unwrap();
        (lat, model, sector, vac)
    }

    /// Brute-force count over (f_0..f_{N−1}, n_0..n_{N−1}) with the
    /// two-fold multiplicity of singly occupied sites.
    fn enumeration_oracle(n_sites: usize, cutoff: i64) -> usize {
        let mut count = 0;
        let fluxes = (2 * cutoff + 1) as usize;
        for f_code in 0..3usize.pow(n_sites as u32) {
            let f: Vec<i64> = (0..n_sites).map(|i| (f_code / 3usize.pow(i as u32) % 3) as i64).collect();
            let multiplicity: usize = f.iter().map(|&x| if x == 1 { 2 } else { 1 }).product();
            for n_code in 0..fluxes.pow(n_sites as u32) {
                let n: Vec<i64> = (0..n_sites).map(|l| (n_code / fluxes.pow(l as u32) % fluxes) as i64 - cutoff).collect();
                if (0..n_sites).all(|i| n[i] - n[(i + n_sites - 1) % n_sites] == f[i] - 1) {
                    count += multiplicity;
                }
            }
        }
        count
    }

    #[test]
    fn sector_dimension_three_ways() {
        for (n_sites, cutoff) in [(2, 1), (2, 2), (3, 1)] {
            let lat = Lattice::new(&LatticeConfig::electric(n_sites, cutoff)).unwrap();
            let model = build_model(&lat, 0.0);
            let sector = physical_projector(&lat, &model).unwrap();
            assert_eq!(sector.dim_physical, enumeration_oracle(n_sites, cutoff as i64));
            if lat.space.total_dim <= 500 {
                let (vals, _) = hermitian_eigen(&model.gauss_penalty().to_dense());
                let kernel = vals.iter().filter(|v| v.abs() < 1e-9).count();
                assert_eq!(kernel, sector.dim_physical);
            }
        }
        let lat = Lattice::new(&LatticeConfig::electric(2, 1)).unwrap();
        let sector = physical_projector(&lat, &build_model(&lat, 0.0)).unwrap();
        assert_eq!(sector.dim_physical, 16);
        let p = &sector.projector;
        assert!((&p.matmul(p) - p).frobenius_norm() < 1e-12);
    }

    #[test]
    fn physical_states_sit_at_half_filling() {
        let lat = Lattice::new(&LatticeConfig::electric(3, 1)).unwrap();
        for i in enumerate_physical(&lat).unwrap() {
            let filling: usize = (0..3).map(|s| lat.space.site_occupation(i, s)).sum();
            assert_eq!(filling, 3);
        }
    }

    #[test]
    fn projector_commutes_with_covariant_hamiltonian() {
        let (_, model, sector, _) = calibrated(&LatticeConfig::electric(2, 1));
        assert!(sector.projector.commutator(&model.hamiltonian).frobenius_norm() < 1e-10);
    }

    #[test]
    fn calibrated_vacuum_has_zero_energy_and_satisfies_gauss() {
        let (lat, model, _, vac) = calibrated(&LatticeConfig::electric(2, 1));
        assert!(model.hamiltonian.expectation(&vac.vector).norm() < 1e-12);
        assert!(norm(&model.hamiltonian.matvec(&vac.vector)) < 1e-10);
        assert!(vac.gauss_residuals.iter().all(|&r| r < 1e-10));
        assert!((norm(&vac.vector) - 1.0).abs() < 1e-12);
        assert_eq!(vac.degeneracy, 1);
        for seed in 0..4 {
            let chi = ChiFunction::random(2, 0.8, seed, 1.0);
            let g = GaugeOperators::build(&chi, &lat, &model).unwrap();
            assert!(norm(&sub(&g.apply_oa(&vac.vector), &vac.vector)) < 1e-9);
        }
    }

    #[test]
    fn zero_charge_epsilon_is_free_dirac_ground() {
        let mut cfg = LatticeConfig::oscillator(3, 2);
        cfg.charge = 0.0;
        cfg.mass = 0.7;
        let lat = Lattice::new(&cfg).unwrap();
        let eps = calibrate_epsilon_r(&lat).unwrap();
        let (sp, _) = hermitian_eigen(&crate::model::dirac_single_particle(&cfg));
        let free = -0.5 * sp.iter().map(|l| l.abs()).sum::<f64>();
        assert!((eps - free).abs() < 1e-10, "{eps} vs {free}");
    }

    #[test]
    fn penalty_mode_reports_gauss_violation() {
        let mut cfg = LatticeConfig::oscillator(2, 2);
        let (_, _, sector, vac) = calibrated(&cfg);
        assert!(matches!(sector.mode, SectorMode::Penalty { .. }));
        assert!(vac.penalty_g2.unwrap() > 1e-6);
        assert!(sector.gauss_kernel_dim.unwrap() > 0);
        // with the charge switched off the truncated E has a discrete
        // spectrum and the penalized ground state lands in the kernel
        cfg.charge = 0.0;
        let (_, model, _, vac) = calibrated(&cfg);
        assert!(vac.penalty_g2.unwrap() < 1e-12);
        assert!(norm(&model.hamiltonian.matvec(&vac.vector)) < 1e-10);
    }

    #[test]
    fn lanczos_and_dense_vacuum_agree() {
        for cfg in [LatticeConfig::electric(3, 1), LatticeConfig::electric(2, 2)] {
            let lat = Lattice::new(&cfg).unwrap();
            let model = build_model(&lat, 0.0);
            let sector = physical_projector(&lat, &model).unwrap();
            let dense = vacuum_state_with(&model, &sector, EigenMethod::Dense).unwrap();
            let lanczos = vacuum_state_with(&model, &sector, EigenMethod::Lanczos).unwrap();
            assert!((dense.energy_pre_shift - lanczos.energy_pre_shift).abs() < 1e-8);
            let overlap = crate::linalg::dot(&dense.vector, &lanczos.vector).norm();
            if dense.degeneracy == 1 {
                assert!((overlap - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_ground_is_flagged_with_deterministic_representative() {
        // chargeless oscillator chain with odd n_max: the truncated E has
        // no zero eigenvalue, so uniform fields ±e tie for the ground level
        let mut cfg = LatticeConfig::oscillator(2, 1);
        cfg.charge = 0.0;
        let lat = Lattice::new(&cfg).unwrap();
        let model = build_model(&lat, 0.0);
        let sector = physical_projector(&lat, &model).unwrap();
        let a = vacuum_state(&model, &sector).unwrap();
        let b = vacuum_state(&model, &sector).unwrap();
        assert!(a.is_degenerate());
        assert_eq!(a.vector, b.vector);
        let first = a.vector.iter().position(|v| v.norm() > 1e-8).unwrap();
        assert!(a.vector[first].im.abs() < 1e-14 && a.vector[first].re > 0.0);
    }

    #[test]
    fn canonical_representative_fixes_phase() {
        let v = vec![c(0.0, 0.6), c(0.8, 0.0)];
        let r = canonical_representative(&[v]);
        assert!((r[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((r[1] - c(0.0, -0.8)).norm() < 1e-15);
    }
}
