//! Gauge-function operators: the χ-weighted charge `C`, the unitaries
//! `O1 = exp(−i·a·Σ_l E_l ∇χ_l)`, `O2 = exp(−iC)` and
//! `O_a = exp(i·a·Σ_i χ_i G_i)`, the nested-commutator expansion of
//! `O2† H O2`, and the exact difference `D = O2† H O2 − H`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::BosonOps;
use crate::linalg::{c, expm_i_hermitian_action, LinalgError, OperatorFlags, OperatorMatrix, C64};
use crate::model::{Lattice, ModelOperators};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("chi has {got} values but the lattice has {expected} sites")]
    LengthMismatch { expected: usize, got: usize },
    #[error("chi bump site {site} outside the lattice of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("series order must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Real gauge function sampled on the sites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiFunction {
    pub values: Vec<f64>,
    pub spacing: f64,
}

impl ChiFunction {
    pub fn new(values: Vec<f64>, spacing: f64) -> Self {
        Self { values, spacing }
    }

    pub fn constant(n_sites: usize, value: f64, spacing: f64) -> Self {
        Self::new(vec![value; n_sites], spacing)
    }

    pub fn bump(n_sites: usize, site: usize, height: f64, spacing: f64) -> Result<Self, GaugeError> {
        if site >= n_sites {
            return Err(GaugeError::SiteOutOfRange { site, n_sites });
        }
        let mut values = vec![0.0; n_sites];
        values[site] = height;
        Ok(Self::new(values, spacing))
    }

    /// `amp · u_i` with `u_i` uniform on `[−1, 1]`; the direction depends on
    /// the seed only, so sweeping `amp` rescales a fixed profile.
    pub fn random(n_sites: usize, amp: f64, seed: u64, spacing: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n_sites).map(|_| amp * rng.gen_range(-1.0..=1.0)).collect();
        Self::new(values, spacing)
    }

    pub fn n_sites(&self) -> usize {
        self.values.len()
    }

    /// Forward difference `(χ_{l+1} − χ_l)/a` on each periodic link.
    pub fn gradient(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n).map(|l| (self.values[(l + 1) % n] - self.values[l]) / self.spacing).collect()
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self::new(self.values.iter().map(|v| v + offset).collect(), self.spacing)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.values.iter().map(|v| v * factor).collect(), self.spacing)
    }

    pub fn amplitude(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    fn check_len(&self, n_sites: usize) -> Result<(), GaugeError> {
        if self.values.len() != n_sites {
            return Err(GaugeError::LengthMismatch { expected: n_sites, got: self.values.len() });
        }
        Ok(())
    }
}

/// How a run obtains its χ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChiSpec {
    Explicit { values: Vec<f64> },
    Bump { site: usize, height: f64 },
    Random { amp: f64, seed: Option<u64> },
}

impl Default for ChiSpec {
    fn default() -> Self {
        ChiSpec::Random { amp: 0.3, seed: None }
    }
}

impl ChiSpec {
    pub fn resolve(&self, n_sites: usize, spacing: f64, default_seed: u64) -> Result<ChiFunction, GaugeError> {
        let chi = match self {
            ChiSpec::Explicit { values } => ChiFunction::new(values.clone(), spacing),
            ChiSpec::Bump { site, height } => ChiFunction::bump(n_sites, *site, *height, spacing)?,
            ChiSpec::Random { amp, seed } => ChiFunction::random(n_sites, *amp, seed.unwrap_or(default_seed), spacing),
        };
        chi.check_len(n_sites)?;
        Ok(chi)
    }
}

/// `C = a·Σ_i χ_i ρ_i`
pub fn build_c(chi: &ChiFunction, model: &ModelOperators) -> Result<OperatorMatrix, GaugeError> {
    chi.check_len(model.n_sites())?;
    let mut acc = OperatorMatrix::zeros(model.dim());
    for (x, rho) in chi.values.iter().zip(&model.charge_density) {
        acc = &acc + &rho.scale_real(*x);
    }
    Ok(acc.scale_real(chi.spacing).with_flags(OperatorFlags::HERMITIAN_DIAGONAL))
}

/// `B = a·Σ_l E_l (∇χ)_l`, so that `O1 = exp(−iB)`.
pub fn o1_generator(chi: &ChiFunction, lat: &Lattice) -> Result<OperatorMatrix, GaugeError> {
    chi.check_len(lat.cfg.n_sites)?;
    let mut acc = OperatorMatrix::zeros(lat.space.total_dim);
    for (l, g) in chi.gradient().into_iter().enumerate() {
        acc = &acc + &lat.bosons.electric_field(l).scale_real(g);
    }
    Ok(acc.scale_real(chi.spacing).with_flags(OperatorFlags::HERMITIAN))
}

/// `O1` as a product of commuting single-link exponentials; each factor is
/// exponentiated on its own link and then embedded.
pub fn build_o1(chi: &ChiFunction, lat: &Lattice) -> Result<OperatorMatrix, GaugeError> {
    chi.check_len(lat.cfg.n_sites)?;
    let local_e = lat.bosons.local_electric();
    let mut acc = lat.identity();
    for (l, g) in chi.gradient().into_iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let local = local_e.exp_i_hermitian(-chi.spacing * g)?;
        acc = acc.matmul(&lat.space.embed_link(l, &local));
    }
    let diagonal = lat.cfg.is_electric();
    Ok(acc.with_flags(OperatorFlags { unitary: true, diagonal, hermitian: false }))
}

/// `O2 = exp(−iC)`, a diagonal phase on occupation states.
pub fn build_o2(c_op: &OperatorMatrix) -> Result<OperatorMatrix, GaugeError> {
    Ok(c_op.exp_i_hermitian(-1.0)?)
}

/// `K = a·Σ_i χ_i G_i`, so that `O_a = exp(iK)`.
pub fn oa_generator(chi: &ChiFunction, model: &ModelOperators) -> Result<OperatorMatrix, GaugeError> {
    chi.check_len(model.n_sites())?;
    let mut acc = OperatorMatrix::zeros(model.dim());
    for (x, g) in chi.values.iter().zip(&model.gauss) {
        acc = &acc + &g.scale_real(*x);
    }
    Ok(acc.scale_real(chi.spacing).with_flags(OperatorFlags::HERMITIAN))
}

/// `O_a` exponentiated directly from its generator (not from `O2·O1`).
pub fn build_oa(chi: &ChiFunction, model: &ModelOperators) -> Result<OperatorMatrix, GaugeError> {
    Ok(oa_generator(chi, model)?.exp_i_hermitian(1.0)?)
}

/// All χ-dependent operators of one run.
#[derive(Clone, Debug)]
pub struct GaugeOperators {
    pub chi: ChiFunction,
    pub c: OperatorMatrix,
    pub o1: OperatorMatrix,
    pub o2: OperatorMatrix,
    /// `None` when the generator is non-diagonal and too large for a dense
    /// exponential; use [`GaugeOperators::apply_oa`] then.
    pub oa: Option<OperatorMatrix>,
    pub oa_generator: OperatorMatrix,
}

impl GaugeOperators {
    pub fn build(chi: &ChiFunction, lat: &Lattice, model: &ModelOperators) -> Result<Self, GaugeError> {
        let c_op = build_c(chi, model)?;
        let o1 = build_o1(chi, lat)?;
        let o2 = build_o2(&c_op)?;
        let oa_gen = oa_generator(chi, model)?;
        let oa = match oa_gen.exp_i_hermitian(1.0) {
            Ok(m) => Some(m),
            Err(LinalgError::DenseLimit { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(Self { chi: chi.clone(), c: c_op, o1, o2, oa, oa_generator: oa_gen })
    }

    pub fn apply_oa(&self, v: &[C64]) -> Vec<C64> {
        match &self.oa {
            Some(oa) => oa.matvec(v),
            None => expm_i_hermitian_action(|x, y| self.oa_generator.matvec_into(x, y), v.len(), 1.0, v, 1e-13),
        }
    }
}

/// `‖a·Σ_i χ_i (E_i − E_{i−1})/a + a·Σ_l E_l (∇χ)_l‖_F`: periodic summation
/// by parts, zero up to rounding.
pub fn summation_by_parts_residual(chi: &ChiFunction, lat: &Lattice) -> Result<f64, GaugeError> {
    chi.check_len(lat.cfg.n_sites)?;
    let n = lat.cfg.n_sites;
    let mut lhs = OperatorMatrix::zeros(lat.space.total_dim);
    for (i, x) in chi.values.iter().enumerate() {
        let div = (lat.bosons.electric_field(i) - lat.bosons.electric_field((i + n - 1) % n))
            .scale_real(1.0 / chi.spacing);
        lhs = &lhs + &div.scale_real(x * chi.spacing);
    }
    let rhs = o1_generator(chi, lat)?.scale_real(-1.0);
    Ok((&lhs - &rhs).frobenius_norm())
}

/// How far conjugation by `O1` is from a pure gauge shift of the links.
///
/// Electric basis: `max_l ‖O1 U_l O1† − e^{−iqa(∇χ)_l} U_l‖_F` (exact).
/// Oscillator basis: `max_l ‖O1† A_l O1 − (A_l − (∇χ)_l)‖_F`, nonzero
/// through the cutoff.
pub fn o1_conjugation_defect(chi: &ChiFunction, lat: &Lattice, o1: &OperatorMatrix) -> f64 {
    let grad = chi.gradient();
    let o1_dag = o1.adjoint();
    let id = lat.identity();
    match &lat.bosons {
        BosonOps::Electric { u, .. } => {
            let qa = lat.cfg.charge * lat.cfg.spacing;
            u.iter()
                .zip(&grad)
                .map(|(ul, g)| {
                    let conj = o1.matmul(ul).matmul(&o1_dag);
                    (&conj - &ul.scale(c(0.0, -qa * g).exp())).frobenius_norm()
                })
                .fold(0.0, f64::max)
        }
        BosonOps::Oscillator { a, .. } => a
            .iter()
            .zip(&grad)
            .map(|(al, g)| {
                let conj = o1_dag.matmul(al).matmul(o1);
                (&conj - &(al - &id.scale_real(*g))).frobenius_norm()
            })
            .fold(0.0, f64::max),
    }
}

/// Partial sums `Σ_{k=0}^{K} (i^k/k!)·ad_C^k(H)` for `K = 0..=order`.
pub fn bch_partial_sums(h: &OperatorMatrix, c_op: &OperatorMatrix, order: usize) -> Result<Vec<OperatorMatrix>, GaugeError> {
    if order < 1 {
        return Err(GaugeError::ZeroOrder);
    }
    let mut sums = Vec::with_capacity(order + 1);
    let mut nested = h.clone();
    let mut acc = h.clone();
    sums.push(acc.clone().with_flags(OperatorFlags::HERMITIAN));
    let mut coefficient = c(1.0, 0.0);
    for k in 1..=order {
        nested = c_op.commutator(&nested);
        coefficient *= c(0.0, 1.0 / k as f64);
        acc = &acc + &nested.scale(coefficient);
        sums.push(acc.clone().with_flags(OperatorFlags::HERMITIAN));
    }
    Ok(sums)
}

/// `H + i[C,H] + (i²/2)[C,[C,H]] + …` through `order` nested commutators.
pub fn bch_conjugate(h: &OperatorMatrix, c_op: &OperatorMatrix, order: usize) -> Result<OperatorMatrix, GaugeError> {
    Ok(bch_partial_sums(h, c_op, order)?.pop().expect("order ≥ 1"))
}

/// `O2† H O2`
pub fn conjugate(h: &OperatorMatrix, o2: &OperatorMatrix) -> OperatorMatrix {
    o2.adjoint().matmul(h).matmul(o2).with_flags(OperatorFlags::HERMITIAN)
}

/// `D = O2† H O2 − H`, exact.
pub fn build_d(h: &OperatorMatrix, o2: &OperatorMatrix) -> OperatorMatrix {
    (&conjugate(h, o2) - h).with_flags(OperatorFlags::HERMITIAN)
}
