//! Lattice Dirac–Maxwell Hamiltonian and its composite operators.
//!
//! Conventions: 2-component spinors with `α = σ¹`, `β = σ³`; link `l`
//! joins site `l` to site `l + 1 (mod N)`. The current lives on the forward
//! link and the Gauss operator uses the backward difference of the electric
//! field, so that `a·Σ_i G_i = −Q` telescopes on the periodic chain.
//!
//! Normalizations carry the lattice spacing explicitly: `ρ_i` and `J_l`
//! are densities (`1/a`), the fermion modes obey `{ψ, ψ†} = 1`, and spatial
//! integrals become `a·Σ`.

use nalgebra::DMatrix;

use crate::config::{Coupling, LatticeConfig};
use crate::hilbert::{boson_ops, build_space, fermion_ops, BosonOps, FermionOps, HilbertError, HilbertSpace};
use crate::linalg::{c, OperatorFlags, OperatorMatrix, C64};

/// Elementary layer: configuration, space and field operators.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub cfg: LatticeConfig,
    pub space: HilbertSpace,
    pub fermions: FermionOps,
    pub bosons: BosonOps,
}

impl Lattice {
    pub fn new(cfg: &LatticeConfig) -> Result<Self, HilbertError> {
        let space = build_space(cfg)?;
        let fermions = fermion_ops(&space);
        let bosons = boson_ops(cfg, &space);
        Ok(Self { cfg: cfg.clone(), space, fermions, bosons })
    }

    pub fn identity(&self) -> OperatorMatrix {
        OperatorMatrix::identity(self.space.total_dim)
    }

    /// Sites joined by link `l`.
    pub fn link_ends(&self, link: usize) -> (usize, usize) {
        (link, (link + 1) % self.cfg.n_sites)
    }

    fn previous_link(&self, site: usize) -> usize {
        (site + self.cfg.n_sites - 1) % self.cfg.n_sites
    }
}

#[derive(Clone, Debug)]
pub struct ModelOperators {
    pub coupling: Coupling,
    pub spacing: f64,
    pub h0d: OperatorMatrix,
    pub h0m: OperatorMatrix,
    pub h_int: OperatorMatrix,
    /// `h0d + h0m + h_int − ε_R`.
    pub hamiltonian: OperatorMatrix,
    pub charge_density: Vec<OperatorMatrix>,
    /// Field-independent lattice current `J_l`.
    pub current: Vec<OperatorMatrix>,
    /// Current that closes the continuity equation of the full Hamiltonian:
    /// the link-dressed current in the covariant variant, `J_l` otherwise.
    pub dynamical_current: Vec<OperatorMatrix>,
    pub gauss: Vec<OperatorMatrix>,
    pub total_charge: OperatorMatrix,
    pub epsilon_r: f64,
}

impl ModelOperators {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn n_sites(&self) -> usize {
        self.charge_density.len()
    }

    /// The Hamiltonian without the vacuum shift.
    pub fn hamiltonian_unshifted(&self) -> OperatorMatrix {
        (&self.hamiltonian + &OperatorMatrix::identity(self.dim()).scale_real(self.epsilon_r))
            .with_flags(OperatorFlags::HERMITIAN)
    }

    /// Lattice divergence `(J_i − J_{i−1})/a` of the given current at `site`.
    pub fn divergence(&self, current: &[OperatorMatrix], site: usize) -> OperatorMatrix {
        let n = current.len();
        (&current[site] - &current[(site + n - 1) % n]).scale_real(1.0 / self.spacing)
    }

    /// `a·Σ_i G_i²`
    pub fn gauss_penalty(&self) -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(self.dim());
        for g in &self.gauss {
            acc = &acc + &g.matmul(g);
        }
        acc.scale_real(self.spacing).with_flags(OperatorFlags::HERMITIAN)
    }
}

/// `2N × 2N` single-particle matrix of the free Dirac Hamiltonian
/// (symmetric nearest-neighbour derivative plus mass).
pub fn dirac_single_particle(cfg: &LatticeConfig) -> DMatrix<C64> {
    let n_modes = 2 * cfg.n_sites;
    let mut h = DMatrix::<C64>::zeros(n_modes, n_modes);
    let hop = c(0.0, -1.0 / (2.0 * cfg.spacing));
    for link in 0..cfg.n_sites {
        let (i, j) = (link, (link + 1) % cfg.n_sites);
        for (cc, dd) in [(0, 1), (1, 0)] {
            h[(2 * i + cc, 2 * j + dd)] += hop;
            h[(2 * j + dd, 2 * i + cc)] += hop.conj();
        }
    }
    for i in 0..cfg.n_sites {
        h[(2 * i, 2 * i)] += c(cfg.mass, 0.0);
        h[(2 * i + 1, 2 * i + 1)] -= c(cfg.mass, 0.0);
    }
    h
}

/// `ψ†_i α ψ_j` summed over spinor components.
fn alpha_bilinear(lat: &Lattice, i: usize, j: usize) -> OperatorMatrix {
    let f = &lat.fermions;
    let s = &lat.space;
    let a = f.psi_dag(s.mode(i, 0)).matmul(f.psi(s.mode(j, 1)));
    let b = f.psi_dag(s.mode(i, 1)).matmul(f.psi(s.mode(j, 0)));
    &a + &b
}

/// Free hopping bilinears `X_l = ψ†_l α ψ_{l+1}`, one per link.
pub fn hopping_bilinears(lat: &Lattice) -> Vec<OperatorMatrix> {
    (0..lat.cfg.n_sites)
        .map(|l| {
            let (i, j) = lat.link_ends(l);
            alpha_bilinear(lat, i, j)
        })
        .collect()
}

/// Symmetrized free Dirac Hamiltonian: normal-ordered bilinear minus half
/// the single-particle trace.
pub fn build_h0d(lat: &Lattice) -> OperatorMatrix {
    let h = dirac_single_particle(&lat.cfg);
    let dim = lat.space.total_dim;
    let mut acc = OperatorMatrix::zeros(dim);
    for a in 0..h.nrows() {
        for b in 0..h.ncols() {
            if h[(a, b)] != C64::default() {
                let term = lat.fermions.psi_dag(a).matmul(lat.fermions.psi(b)).scale(h[(a, b)]);
                acc = &acc + &term;
            }
        }
    }
    let shift = h.trace() * c(0.5, 0.0);
    (&acc - &OperatorMatrix::identity(dim).scale(shift)).with_flags(OperatorFlags::HERMITIAN)
}

/// `(a/2)·Σ_l E_l²`; the magnetic term is absent in one dimension.
pub fn build_h0m(lat: &Lattice) -> OperatorMatrix {
    let mut acc = OperatorMatrix::zeros(lat.space.total_dim);
    for l in 0..lat.space.n_links {
        let e = lat.bosons.electric_field(l);
        acc = &acc + &e.matmul(e);
    }
    acc.scale_real(lat.cfg.spacing / 2.0).with_flags(OperatorFlags::HERMITIAN)
}

/// `ρ_i = (q/a)·Σ_c (n_{i,c} − ½)`, diagonal in the occupation basis.
pub fn build_charge_density(lat: &Lattice) -> Vec<OperatorMatrix> {
    let scale = lat.cfg.charge / lat.cfg.spacing;
    (0..lat.cfg.n_sites)
        .map(|site| {
            lat.space
                .diagonal_from(|index| scale * (lat.space.site_occupation(index, site) as f64 - 1.0))
        })
        .collect()
}

/// `J_l = (q/2a)·(ψ†_l α ψ_{l+1} + h.c.)`
pub fn build_current(lat: &Lattice) -> Vec<OperatorMatrix> {
    current_from_bilinears(lat, &hopping_bilinears(lat))
}

fn current_from_bilinears(lat: &Lattice, bilinears: &[OperatorMatrix]) -> Vec<OperatorMatrix> {
    let scale = lat.cfg.charge / (2.0 * lat.cfg.spacing);
    bilinears
        .iter()
        .map(|x| (x + &x.adjoint()).scale_real(scale).with_flags(OperatorFlags::HERMITIAN))
        .collect()
}

fn hopping_from_bilinears(lat: &Lattice, bilinears: &[OperatorMatrix]) -> OperatorMatrix {
    let mut acc = OperatorMatrix::zeros(lat.space.total_dim);
    for x in bilinears {
        acc = &acc + &(x - &x.adjoint());
    }
    acc.scale(c(0.0, -1.0 / (2.0 * lat.cfg.spacing)))
}

/// Link-dressed bilinears `ψ†_l α U_l ψ_{l+1}` with `U_l → e^{−iqaθ_l}·U_l`.
fn covariant_bilinears(lat: &Lattice, shifts: &[f64]) -> Vec<OperatorMatrix> {
    let BosonOps::Electric { u, .. } = &lat.bosons else {
        panic!("covariant coupling requires the electric basis");
    };
    let qa = lat.cfg.charge * lat.cfg.spacing;
    hopping_bilinears(lat)
        .iter()
        .enumerate()
        .map(|(l, x)| u[l].matmul(x).scale(c(0.0, -qa * shifts[l]).exp()))
        .collect()
}

/// `G_i = (E_i − E_{i−1})/a − ρ_i`
pub fn build_gauss(lat: &Lattice, charge_density: &[OperatorMatrix]) -> Vec<OperatorMatrix> {
    (0..lat.cfg.n_sites)
        .map(|site| {
            let div_e = (lat.bosons.electric_field(site) - lat.bosons.electric_field(lat.previous_link(site)))
                .scale_real(1.0 / lat.cfg.spacing);
            (&div_e - &charge_density[site]).with_flags(OperatorFlags::HERMITIAN)
        })
        .collect()
}

/// Interaction part for a uniform or per-link shift of the gauge potential.
///
/// Linear coupling: `−a·Σ_l J_l (A_l + θ_l)`. Covariant coupling: the
/// dressed hopping with `U_l → e^{−iqaθ_l} U_l`, minus the free hopping.
pub fn build_interaction(lat: &Lattice, shifts: &[f64]) -> OperatorMatrix {
    assert_eq!(shifts.len(), lat.cfg.n_sites, "one shift per link");
    let dim = lat.space.total_dim;
    match (&lat.bosons, lat.cfg.coupling) {
        (BosonOps::Oscillator { a, .. }, Coupling::Linear) => {
            let current = build_current(lat);
            let mut acc = OperatorMatrix::zeros(dim);
            for (l, j) in current.iter().enumerate() {
                let shifted = &a[l] + &OperatorMatrix::identity(dim).scale_real(shifts[l]);
                acc = &acc + &j.matmul(&shifted);
            }
            acc.scale_real(-lat.cfg.spacing).with_flags(OperatorFlags::HERMITIAN)
        }
        (BosonOps::Electric { .. }, Coupling::Covariant) => {
            let dressed = hopping_from_bilinears(lat, &covariant_bilinears(lat, shifts));
            let free = hopping_from_bilinears(lat, &hopping_bilinears(lat));
            (&dressed - &free).with_flags(OperatorFlags::HERMITIAN)
        }
        _ => panic!("coupling/basis pairing was not validated"),
    }
}

/// Full Hamiltonian with the gauge potential shifted by `shifts` on each
/// link; `build_model` uses zero shifts.
pub fn build_hamiltonian_shifted(lat: &Lattice, epsilon_r: f64, shifts: &[f64]) -> OperatorMatrix {
    let parts = [build_h0d(lat), build_h0m(lat), build_interaction(lat, shifts)];
    assemble(lat, &parts[0], &parts[1], &parts[2], epsilon_r)
}

fn assemble(lat: &Lattice, h0d: &OperatorMatrix, h0m: &OperatorMatrix, h_int: &OperatorMatrix, epsilon_r: f64) -> OperatorMatrix {
    let shift = lat.identity().scale_real(epsilon_r);
    (&(&(h0d + h0m) + h_int) - &shift).with_flags(OperatorFlags::HERMITIAN)
}

pub fn build_model(lat: &Lattice, epsilon_r: f64) -> ModelOperators {
    let n = lat.cfg.n_sites;
    let h0d = build_h0d(lat);
    let h0m = build_h0m(lat);
    let h_int = build_interaction(lat, &vec![0.0; n]);
    let hamiltonian = assemble(lat, &h0d, &h0m, &h_int, epsilon_r);
    let charge_density = build_charge_density(lat);
    let current = build_current(lat);
    let dynamical_current = match lat.cfg.coupling {
        Coupling::Linear => current.clone(),
        Coupling::Covariant => current_from_bilinears(lat, &covariant_bilinears(lat, &vec![0.0; n])),
    };
    let gauss = build_gauss(lat, &charge_density);
    let mut total_charge = OperatorMatrix::zeros(lat.space.total_dim);
    for rho in &charge_density {
        total_charge = &total_charge + rho;
    }
    let total_charge = total_charge.scale_real(lat.cfg.spacing).with_flags(OperatorFlags::HERMITIAN_DIAGONAL);
    ModelOperators {
        coupling: lat.cfg.coupling,
        spacing: lat.cfg.spacing,
        h0d,
        h0m,
        h_int,
        hamiltonian,
        charge_density,
        current,
        dynamical_current,
        gauss,
        total_charge,
        epsilon_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    fn eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
        hermitian_eigen(&op.to_dense()).0
    }

    #[test]
    fn massless_dirac_spectrum_is_symmetric() {
        let mut cfg = LatticeConfig::electric(3, 1);
        cfg.mass = 0.0;
        let lat = Lattice::new(&cfg).unwrap();
        // The fermion factor alone suffices: restrict to boson digit 0.
        let h = build_h0d(&lat);
        let idx: Vec<usize> = (0..lat.space.fermion_dim).map(|f| f * lat.space.boson_dim).collect();
        let (vals, _) = hermitian_eigen(&h.restrict(&idx));
        let n = vals.len();
        for k in 0..n {
            assert!((vals[k] + vals[n - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn h0d_ground_matches_single_particle_filling() {
        for (n_sites, mass) in [(2, 1.0), (3, 0.4), (4, 0.0)] {
            let mut cfg = LatticeConfig::oscillator(n_sites, 1);
            cfg.mass = mass;
            cfg.spacing = 0.8;
            let lat = Lattice::new(&cfg).unwrap();
            let (sp, _) = hermitian_eigen(&dirac_single_particle(&cfg));
            let oracle = -0.5 * sp.iter().map(|l| l.abs()).sum::<f64>();
            let h = build_h0d(&lat);
            let idx: Vec<usize> = (0..lat.space.fermion_dim).map(|f| f * lat.space.boson_dim).collect();
            let (vals, _) = hermitian_eigen(&h.restrict(&idx));
            assert!((vals[0] - oracle).abs() < 1e-10, "N={n_sites}: {} vs {oracle}", vals[0]);
        }
    }

    #[test]
    fn h0d_does_not_depend_on_charge() {
        let mut cfg = LatticeConfig::electric(2, 1);
        let h1 = build_h0d(&Lattice::new(&cfg).unwrap());
        cfg.charge = -2.7;
        let h2 = build_h0d(&Lattice::new(&cfg).unwrap());
        assert_eq!((&h1 - &h2).frobenius_norm(), 0.0);
    }

    #[test]
    fn h0m_single_link_spectrum() {
        let cfg = LatticeConfig::electric(2, 1);
        let lat = Lattice::new(&cfg).unwrap();
        let e = lat.bosons.local_electric();
        let local = e.matmul(e).scale_real(0.5);
        let mut vals: Vec<f64> = local.diagonal().iter().map(|v| v.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![0.0, 0.5, 0.5]);
        let h0m = build_h0m(&lat);
        assert!(h0m.diagonal().iter().all(|v| v.re >= 0.0));
        assert!(h0m.is_diagonal());
    }

    #[test]
    fn oscillator_e_squared_matches_ladder_closed_form() {
        let (n_max, omega, a) = (4, 1.7, 0.9);
        let mut cfg = LatticeConfig::oscillator(2, n_max);
        cfg.boson_basis = crate::config::BosonBasis::Oscillator { n_max, omega };
        cfg.spacing = a;
        let lat = Lattice::new(&cfg).unwrap();
        let e = lat.bosons.local_electric();
        let e2 = e.matmul(e);
        // (b − b†)² has diagonal −(2n+1) (with the top level missing its
        // upward term) and off-diagonals √(n(n−1)) two steps apart.
        let pref = -omega / (2.0 * a);
        for n in 0..=n_max {
            let diag = if n == n_max { -(n as f64) } else { -(2.0 * n as f64 + 1.0) };
            assert!((e2.get(n, n).re - pref * diag).abs() < 1e-12);
            if n >= 2 {
                let off = ((n * (n - 1)) as f64).sqrt();
                assert!((e2.get(n - 2, n).re - pref * off).abs() < 1e-12);
            }
        }
        let h0m = build_h0m(&lat);
        assert!(eigenvalues(&h0m)[0] >= -1e-12);
    }

    #[test]
    fn charge_density_spectrum() {
        let mut cfg = LatticeConfig::electric(2, 1);
        cfg.charge = 1.3;
        cfg.spacing = 0.5;
        let lat = Lattice::new(&cfg).unwrap();
        let rho = build_charge_density(&lat);
        let qa = cfg.charge / cfg.spacing;
        // index 0: every mode empty; last fermion state: every mode filled
        assert!((rho[0].get(0, 0).re + qa).abs() < 1e-15);
        let full = (lat.space.fermion_dim - 1) * lat.space.boson_dim;
        assert!((rho[1].get(full, full).re - qa).abs() < 1e-15);
        for r in &rho {
            assert!(r.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn free_continuity_holds_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n_sites in [2, 3] {
            for _ in 0..3 {
                let mut cfg = LatticeConfig::oscillator(n_sites, 1);
                cfg.mass = rng.gen_range(0.0..2.0);
                cfg.charge = rng.gen_range(-2.0..2.0);
                cfg.spacing = rng.gen_range(0.5..1.5);
                let lat = Lattice::new(&cfg).unwrap();
                let m = build_model(&lat, 0.0);
                for site in 0..n_sites {
                    let lhs = m.h0d.commutator(&m.charge_density[site]);
                    let rhs = m.divergence(&m.current, site).scale(c(0.0, 1.0));
                    assert!((&lhs - &rhs).frobenius_norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn covariant_continuity_uses_dressed_current() {
        let lat = Lattice::new(&LatticeConfig::electric(3, 1)).unwrap();
        let m = build_model(&lat, 0.0);
        for site in 0..3 {
            let lhs = m.hamiltonian.commutator(&m.charge_density[site]);
            let rhs = m.divergence(&m.dynamical_current, site).scale(c(0.0, 1.0));
            assert!((&lhs - &rhs).frobenius_norm() < TOL);
        }
    }

    #[test]
    fn zero_charge_kills_current() {
        let mut cfg = LatticeConfig::oscillator(2, 2);
        cfg.charge = 0.0;
        let lat = Lattice::new(&cfg).unwrap();
        let m = build_model(&lat, 0.0);
        assert!(m.current.iter().all(|j| j.nnz() == 0));
        assert_eq!(m.h_int.nnz(), 0);
    }

    #[test]
    fn gauss_operators_commute_and_telescope() {
        for cfg in [LatticeConfig::electric(2, 1), LatticeConfig::oscillator(3, 1)] {
            let lat = Lattice::new(&cfg).unwrap();
            let m = build_model(&lat, 0.0);
            let mut sum = OperatorMatrix::zeros(m.dim());
            for (i, gi) in m.gauss.iter().enumerate() {
                sum = &sum + gi;
                for gj in &m.gauss[i + 1..] {
                    assert!(gi.commutator(gj).frobenius_norm() < TOL);
                }
            }
            let telescoped = &sum.scale_real(cfg.spacing) + &m.total_charge;
            assert!(telescoped.frobenius_norm() < TOL);
            assert!(m.total_charge.commutator(&m.hamiltonian).frobenius_norm() < TOL);
        }
    }

    #[test]
    fn covariant_hamiltonian_is_gauge_invariant() {
        let lat = Lattice::new(&LatticeConfig::electric(2, 1)).unwrap();
        let m = build_model(&lat, 0.0);
        for g in &m.gauss {
            assert!(g.commutator(&m.hamiltonian).frobenius_norm() < TOL);
            assert!(g.is_diagonal());
        }
        assert!(m.hamiltonian.verify_flags(TOL).is_ok());
    }

    #[test]
    fn linear_hamiltonian_breaks_gauss_law() {
        let lat = Lattice::new(&LatticeConfig::oscillator(2, 2)).unwrap();
        let m = build_model(&lat, 0.0);
        let worst = m.gauss.iter().map(|g| g.commutator(&m.hamiltonian).frobenius_norm()).fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn zero_charge_decouples_sectors() {
        let mut cfg = LatticeConfig::oscillator(2, 2);
        cfg.charge = 0.0;
        let lat = Lattice::new(&cfg).unwrap();
        let eps = 0.25;
        let m = build_model(&lat, eps);
        let (sp, _) = hermitian_eigen(&dirac_single_particle(&cfg));
        let free = -0.5 * sp.iter().map(|l| l.abs()).sum::<f64>();
        let boson_min = eigenvalues(&build_h0m(&lat))[0];
        assert!((eigenvalues(&m.hamiltonian)[0] - (free + boson_min - eps)).abs() < 1e-10);
    }

    #[test]
    fn link_shift_derivative_reproduces_current() {
        for cfg in [LatticeConfig::electric(2, 1), LatticeConfig::oscillator(2, 2)] {
            let lat = Lattice::new(&cfg).unwrap();
            let m = build_model(&lat, 0.0);
            let step = 1e-5;
            for link in 0..2 {
                let mut plus = vec![0.0; 2];
                let mut minus = vec![0.0; 2];
                plus[link] = step;
                minus[link] = -step;
                let derivative = (&build_hamiltonian_shifted(&lat, 0.0, &plus) - &build_hamiltonian_shifted(&lat, 0.0, &minus))
                    .scale_real(1.0 / (2.0 * step));
                let expected = m.dynamical_current[link].scale_real(-cfg.spacing);
                assert!((&derivative - &expected).frobenius_norm() < 1e-8, "{}", cfg.variant_label());
            }
        }
    }

    #[test]
    fn every_operator_is_hermitian() {
        for cfg in [LatticeConfig::electric(2, 1), LatticeConfig::oscillator(2, 2)] {
            let m = build_model(&Lattice::new(&cfg).unwrap(), 0.3);
            let ops = [&m.h0d, &m.h0m, &m.h_int, &m.hamiltonian, &m.total_charge]
                .into_iter()
                .chain(&m.charge_density)
                .chain(&m.current)
                .chain(&m.dynamical_current)
                .chain(&m.gauss);
            for op in ops {
                assert!(op.hermiticity_residual() < TOL);
            }
        }
    }
}
