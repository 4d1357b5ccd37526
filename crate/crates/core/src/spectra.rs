//! Gauge-rotated vacua `Ω1 = O1|Ω_vac⟩`, `Ω2 = O2|Ω_vac⟩`, their energies,
//! the coupling state `Ω′` and the exact two-state mixing that minimizes
//! `⟨Ω″|H|Ω″⟩` for `Ω″ ∝ Ω2 + αΩ′`.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraint::{restricted_lowest, ConstraintError, EigenMethod, PhysicalSector, SectorMode, VacuumState};
use crate::gauge::{build_d, GaugeOperators};
use crate::linalg::{axpy, c, dot, norm, normalize, OperatorMatrix, C64};
use crate::model::ModelOperators;

/// Below this norm `P·H|Ω2⟩ − e2|Ω2⟩` counts as the zero vector.
pub const COUPLING_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct OmegaPair {
    #[serde(skip)]
    pub omega1: Vec<C64>,
    #[serde(skip)]
    pub omega2: Vec<C64>,
    pub e1: f64,
    pub e2: f64,
    /// `|e1 + e2|`
    pub mirror_residual: f64,
    /// `‖[O1, D]‖` (spectral)
    pub premise_bound: f64,
    pub gauss_residuals_1: Vec<f64>,
    pub gauss_residuals_2: Vec<f64>,
}

impl OmegaPair {
    pub fn max_gauss_residual(&self) -> f64 {
        self.gauss_residuals_1.iter().chain(&self.gauss_residuals_2).fold(0.0, |m, &r| m.max(r))
    }
}

pub fn gauss_residuals(model: &ModelOperators, v: &[C64]) -> Vec<f64> {
    model.gauss.iter().map(|g| norm(&g.matvec(v))).collect()
}

/// `[O1, D]` with `D = O2† H O2 − H`.
pub fn premise_commutator(gauge: &GaugeOperators, model: &ModelOperators) -> (OperatorMatrix, OperatorMatrix) {
    let d = build_d(&model.hamiltonian, &gauge.o2);
    let comm = gauge.o1.commutator(&d);
    (d, comm)
}

pub fn omega_states(gauge: &GaugeOperators, model: &ModelOperators, vac: &VacuumState) -> OmegaPair {
    let omega1 = gauge.o1.matvec(&vac.vector);
    let omega2 = gauge.o2.matvec(&vac.vector);
    let e1 = model.hamiltonian.expectation(&omega1).re;
    let e2 = model.hamiltonian.expectation(&omega2).re;
    let (_, comm) = premise_commutator(gauge, model);
    OmegaPair {
        gauss_residuals_1: gauss_residuals(model, &omega1),
        gauss_residuals_2: gauss_residuals(model, &omega2),
        omega1,
        omega2,
        e1,
        e2,
        mirror_residual: (e1 + e2).abs(),
        premise_bound: comm.spectral_norm(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MirrorTier {
    /// `|e1 + e2| < tol`
    Exact,
    /// `|e1 + e2| ≤ ‖[O1, D]‖ + tol`
    Bounded,
    /// Above the bound; impossible for a correct implementation.
    Violated,
}

#[derive(Clone, Debug, Serialize)]
pub struct MirrorRow {
    pub e1: f64,
    pub e2: f64,
    pub mirror_residual: f64,
    pub premise_bound: f64,
    pub tier: MirrorTier,
}

pub fn mirror_energies(pair: &OmegaPair, tol: f64) -> MirrorRow {
    let tier = if pair.mirror_residual < tol {
        MirrorTier::Exact
    } else if pair.mirror_residual <= pair.premise_bound + tol {
        MirrorTier::Bounded
    } else {
        MirrorTier::Violated
    };
    MirrorRow {
        e1: pair.e1,
        e2: pair.e2,
        mirror_residual: pair.mirror_residual,
        premise_bound: pair.premise_bound,
        tier,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixNorms {
    /// `‖(J_i − J_{i−1})/a |Ω_vac⟩‖` per site, with the current that closes
    /// the continuity equation of the full Hamiltonian.
    pub div_j: Vec<f64>,
    pub h_omega2: f64,
}

pub fn appendix_norms(model: &ModelOperators, vac: &VacuumState, omega2: &[C64]) -> AppendixNorms {
    let div_j = (0..model.n_sites())
        .map(|i| norm(&model.divergence(&model.dynamical_current, i).matvec(&vac.vector)))
        .collect();
    AppendixNorms { div_j, h_omega2: norm(&model.hamiltonian.matvec(omega2)) }
}

/// Outcome of the coupling-state construction.
#[derive(Clone, Debug)]
pub struct CouplingState {
    /// `None` when `P·H|Ω2⟩` is parallel to `Ω2`: no physical state couples.
    pub vector: Option<Vec<C64>>,
    /// `‖P·H|Ω2⟩ − e2|Ω2⟩‖`, which equals `|⟨Ω′|H|Ω2⟩|` when a state exists.
    pub residual_norm: f64,
}

/// `Ω′ = normalize(P·H|Ω2⟩ − ⟨Ω2|P·H|Ω2⟩|Ω2⟩)`
pub fn omega_prime(model: &ModelOperators, sector: &PhysicalSector, omega2: &[C64]) -> CouplingState {
    let mut v = sector.project(&model.hamiltonian.matvec(omega2));
    let overlap = dot(omega2, &v);
    axpy(-overlap, omega2, &mut v);
    let residual_norm = norm(&v);
    if residual_norm < COUPLING_FLOOR {
        return CouplingState { vector: None, residual_norm };
    }
    normalize(&mut v);
    CouplingState { vector: Some(v), residual_norm }
}

/// Seeded random physical state orthogonal to `Ω2`.
pub fn random_omega_prime(sector: &PhysicalSector, omega2: &[C64], seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![C64::default(); omega2.len()];
    for &i in &sector.basis {
        v[i] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let overlap = dot(omega2, &v);
    axpy(-overlap, omega2, &mut v);
    normalize(&mut v);
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct MixResult {
    #[serde(skip)]
    pub omega_prime: Vec<C64>,
    #[serde(skip)]
    pub omega_mixed: Vec<C64>,
    /// `⟨Ω′|H|Ω2⟩`
    pub coupling: C64,
    /// Minimizing `α` in `Ω″ ∝ Ω2 + αΩ′`; `None` when the minimizer is `Ω′`
    /// itself (the limit `|α| → ∞`).
    pub alpha_star: Option<C64>,
    pub e_mixed: f64,
    /// The other eigenvalue of the 2×2 restriction.
    pub e_upper: f64,
    pub e2: f64,
    pub e_prime: f64,
    pub e_ground_physical: f64,
    /// Unit direction of `α` prescribed by dropping `|α|²`: `α*·⟨Ω′|H|Ω2⟩`
    /// negative real. Zero when the coupling vanishes.
    pub linearized_direction: C64,
    /// `d⟨Ω″|H|Ω″⟩/dt` at `t = 0` along `α = t·direction`, i.e. `−2|coupling|`.
    pub linearized_slope: f64,
}

/// Energy of `N(Ω2 + αΩ′)` from the 2×2 data; `omega_prime ⟂ omega2`.
pub fn mixed_energy(e2: f64, e_prime: f64, coupling: C64, alpha: C64) -> f64 {
    let numerator = e2 + 2.0 * (alpha.conj() * coupling).re + alpha.norm_sqr() * e_prime;
    numerator / (1.0 + alpha.norm_sqr())
}

/// Exact minimization of `⟨Ω″|H|Ω″⟩` over complex `α`.
pub fn optimize_mixing(model: &ModelOperators, omega2: &[C64], omega_prime: &[C64], e_ground_physical: f64) -> MixResult {
    let h = &model.hamiltonian;
    let e2 = h.expectation(omega2).re;
    let e_prime = h.expectation(omega_prime).re;
    let coupling = h.matrix_element(omega_prime, omega2);
    let m = Matrix2::new(c(e2, 0.0), coupling.conj(), coupling, c(e_prime, 0.0));
    let eig = m.symmetric_eigen();
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (e_mixed, e_upper) = (eig.eigenvalues[lo], eig.eigenvalues[hi]);
    let v = eig.eigenvectors.column(lo);
    let (v1, v2) = (v[0], v[1]);

    let (alpha_star, e_mixed, omega_mixed) = if coupling.norm() < COUPLING_FLOOR {
        // already diagonal; keep Ω2 unless Ω′ is strictly lower
        if e_prime < e2 {
            (None, e_prime, omega_prime.to_vec())
        } else {
            (Some(C64::default()), e2, omega2.to_vec())
        }
    } else {
        let mut mixed: Vec<C64> = omega2.iter().map(|x| v1 * x).collect();
        axpy(v2, omega_prime, &mut mixed);
        normalize(&mut mixed);
        let alpha = (v1.norm() > 1e-12).then(|| v2 / v1);
        (alpha, e_mixed, mixed)
    };
    let (linearized_direction, linearized_slope) = if coupling.norm() >= COUPLING_FLOOR {
        (-coupling / coupling.norm(), -2.0 * coupling.norm())
    } else {
        (C64::default(), 0.0)
    };
    MixResult {
        omega_prime: omega_prime.to_vec(),
        omega_mixed,
        coupling,
        alpha_star,
        e_mixed,
        e_upper,
        e2,
        e_prime,
        e_ground_physical,
        linearized_direction,
        linearized_slope,
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhysicalGround {
    pub e_min: f64,
    pub gap: f64,
    /// Penalty mode only: lowest level of `H + λ·a·Σ G²`.
    pub penalized_min: Option<f64>,
}

/// Lowest two levels of `H` on the sector. In penalty mode the sector is the
/// whole space, so this is the unconstrained spectrum of `H`.
pub fn physical_ground(model: &ModelOperators, sector: &PhysicalSector) -> Result<PhysicalGround, ConstraintError> {
    let (values, _) = restricted_lowest(&model.hamiltonian, &sector.basis, 2, EigenMethod::Auto)?;
    let gap = values.get(1).map_or(0.0, |e1| e1 - values[0]);
    let penalized_min = match sector.mode {
        SectorMode::Exact => None,
        SectorMode::Penalty { lambda } => {
            let k = &model.hamiltonian + &model.gauss_penalty().scale_real(lambda);
            Some(restricted_lowest(&k, &sector.basis, 1, EigenMethod::Auto)?.0[0])
        }
    };
    Ok(PhysicalGround { e_min: values[0], gap, penalized_min })
}
