//! Tensor-product state space and elementary field operators.
//!
//! Factor order is fixed everywhere: the fermionic factor is leftmost, then
//! links `0..n_links`. A basis index therefore decomposes as
//! `index = fermion_state * boson_dim + Σ_l digit_l * d^(n_links − 1 − l)`.
//! Fermionic modes are numbered site-major, component-minor
//! (`mode = 2·site + component`), and mode 0 is the most significant bit of
//! `fermion_state`. The Jordan–Wigner string of mode `k` runs over modes
//! `0..k`.

use thiserror::Error;

use crate::config::{BosonBasis, ConfigError, LatticeConfig};
use crate::linalg::{c, OperatorFlags, OperatorMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("total Hilbert dimension {total} (= 2^{fermion_modes} × {boson_dim_per_link}^{n_links}) exceeds the cap {cap}")]
    DimensionCap {
        total: u128,
        fermion_modes: usize,
        boson_dim_per_link: usize,
        n_links: usize,
        cap: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    pub n_sites: usize,
    pub fermion_modes: usize,
    pub fermion_dim: usize,
    pub boson_dim_per_link: usize,
    pub n_links: usize,
    pub boson_dim: usize,
    pub total_dim: usize,
}

pub fn build_space(cfg: &LatticeConfig) -> Result<HilbertSpace, HilbertError> {
    cfg.validate()?;
    let fermion_modes = 2 * cfg.n_sites;
    let boson_dim_per_link = cfg.boson_basis.dim_per_link();
    let n_links = cfg.n_sites;
    let refusal = |total: u128| HilbertError::DimensionCap {
        total,
        fermion_modes,
        boson_dim_per_link,
        n_links,
        cap: cfg.dim_cap,
    };
    let mut total: u128 = 1;
    for _ in 0..fermion_modes {
        total = total.saturating_mul(2);
    }
    for _ in 0..n_links {
        total = total.saturating_mul(boson_dim_per_link as u128);
    }
    if total > cfg.dim_cap as u128 {
        return Err(refusal(total));
    }
    let fermion_dim = 1usize << fermion_modes;
    let boson_dim = boson_dim_per_link.pow(n_links as u32);
    Ok(HilbertSpace {
        n_sites: cfg.n_sites,
        fermion_modes,
        fermion_dim,
        boson_dim_per_link,
        n_links,
        boson_dim,
        total_dim: total as usize,
    })
}

impl HilbertSpace {
    pub fn mode(&self, site: usize, component: usize) -> usize {
        debug_assert!(site < self.n_sites && component < 2);
        2 * site + component
    }

    fn mode_bit(&self, mode: usize) -> usize {
        self.fermion_modes - 1 - mode
    }

    pub fn fermion_state(&self, index: usize) -> usize {
        index / self.boson_dim
    }

    pub fn occupied(&self, index: usize, mode: usize) -> bool {
        (self.fermion_state(index) >> self.mode_bit(mode)) & 1 == 1
    }

    /// Number of fermions (0, 1 or 2) on `site` in basis state `index`.
    pub fn site_occupation(&self, index: usize, site: usize) -> usize {
        (0..2).filter(|&comp| self.occupied(index, self.mode(site, comp))).count()
    }

    pub fn link_stride(&self, link: usize) -> usize {
        self.boson_dim_per_link.pow((self.n_links - 1 - link) as u32)
    }

    pub fn link_digit(&self, index: usize, link: usize) -> usize {
        (index % self.boson_dim) / self.link_stride(link) % self.boson_dim_per_link
    }

    /// Lifts a `d × d` single-link operator to the full space.
    pub fn embed_link(&self, link: usize, local: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(local.dim(), self.boson_dim_per_link, "local operator has wrong dimension");
        let mut by_column: Vec<Vec<(usize, C64)>> = vec![Vec::new(); local.dim()];
        for (r, col, v) in local.iter() {
            by_column[col].push((r, v));
        }
        let stride = self.link_stride(link);
        let triplets = (0..self.total_dim).flat_map(|index| {
            let digit = self.link_digit(index, link);
            by_column[digit].iter().map(move |&(r, v)| {
                let target = index + r * stride - digit * stride;
                (target, index, v)
            })
        });
        OperatorMatrix::from_triplets(self.total_dim, triplets).with_flags(local.flags())
    }

    /// Diagonal operator whose entry at each basis state is `f(index)`.
    pub fn diagonal_from<F: Fn(usize) -> f64>(&self, f: F) -> OperatorMatrix {
        let values: Vec<f64> = (0..self.total_dim).map(f).collect();
        OperatorMatrix::from_real_diagonal(&values)
    }
}

/// Jordan–Wigner annihilation and creation operators for every mode.
#[derive(Clone, Debug)]
pub struct FermionOps {
    pub annihilators: Vec<OperatorMatrix>,
    pub creators: Vec<OperatorMatrix>,
}

impl FermionOps {
    pub fn psi(&self, mode: usize) -> &OperatorMatrix {
        &self.annihilators[mode]
    }

    pub fn psi_dag(&self, mode: usize) -> &OperatorMatrix {
        &self.creators[mode]
    }

    pub fn n_modes(&self) -> usize {
        self.annihilators.len()
    }
}

pub fn fermion_ops(space: &HilbertSpace) -> FermionOps {
    let annihilators: Vec<OperatorMatrix> = (0..space.fermion_modes)
        .map(|mode| {
            let bit = space.mode_bit(mode);
            let triplets = (0..space.total_dim).filter_map(|index| {
                let f = space.fermion_state(index);
                if (f >> bit) & 1 == 0 {
                    return None;
                }
                let string = (f >> (bit + 1)).count_ones();
                let sign = if string % 2 == 0 { 1.0 } else { -1.0 };
                Some((index - (1 << bit) * space.boson_dim, index, c(sign, 0.0)))
            });
            OperatorMatrix::from_triplets(space.total_dim, triplets)
        })
        .collect();
    let creators = annihilators.iter().map(|a| a.adjoint()).collect();
    FermionOps { annihilators, creators }
}

/// Per-link gauge-field operators, embedded in the full space, together
/// with the single-link matrices they came from.
#[derive(Clone, Debug)]
pub enum BosonOps {
    Oscillator {
        a: Vec<OperatorMatrix>,
        e: Vec<OperatorMatrix>,
        local_a: OperatorMatrix,
        local_e: OperatorMatrix,
    },
    Electric {
        e: Vec<OperatorMatrix>,
        u: Vec<OperatorMatrix>,
        u_dag: Vec<OperatorMatrix>,
        local_e: OperatorMatrix,
        local_u: OperatorMatrix,
    },
}

impl BosonOps {
    pub fn electric_field(&self, link: usize) -> &OperatorMatrix {
        match self {
            BosonOps::Oscillator { e, .. } | BosonOps::Electric { e, .. } => &e[link],
        }
    }

    pub fn local_electric(&self) -> &OperatorMatrix {
        match self {
            BosonOps::Oscillator { local_e, .. } | BosonOps::Electric { local_e, .. } => local_e,
        }
    }

    pub fn n_links(&self) -> usize {
        match self {
            BosonOps::Oscillator { e, .. } | BosonOps::Electric { e, .. } => e.len(),
        }
    }

    /// Every embedded boson operator, for cross-commutator checks.
    pub fn all(&self) -> Vec<&OperatorMatrix> {
        match self {
            BosonOps::Oscillator { a, e, .. } => a.iter().chain(e).collect(),
            BosonOps::Electric { e, u, u_dag, .. } => e.iter().chain(u).chain(u_dag).collect(),
        }
    }
}

/// Truncated annihilator `b|n⟩ = √n |n−1⟩` on `n_max + 1` levels.
pub fn ladder_lowering(n_max: usize) -> OperatorMatrix {
    let triplets = (1..=n_max).map(|n| (n - 1, n, c((n as f64).sqrt(), 0.0)));
    OperatorMatrix::from_triplets(n_max + 1, triplets)
}

pub fn boson_ops(cfg: &LatticeConfig, space: &HilbertSpace) -> BosonOps {
    let a_sp = cfg.spacing;
    match cfg.boson_basis {
        BosonBasis::Oscillator { n_max, omega } => {
            let b = ladder_lowering(n_max);
            let b_dag = b.adjoint();
            let local_a = (&b + &b_dag)
                .scale_real(1.0 / (2.0 * omega * a_sp).sqrt())
                .with_flags(OperatorFlags::HERMITIAN);
            let local_e = (&b - &b_dag)
                .scale(c(0.0, (omega / (2.0 * a_sp)).sqrt()))
                .with_flags(OperatorFlags::HERMITIAN);
            let a = (0..space.n_links).map(|l| space.embed_link(l, &local_a)).collect();
            let e = (0..space.n_links).map(|l| space.embed_link(l, &local_e)).collect();
            BosonOps::Oscillator { a, e, local_a, local_e }
        }
        BosonBasis::Electric { flux_cutoff } => {
            let d = 2 * flux_cutoff + 1;
            let flux: Vec<f64> = (0..d).map(|j| cfg.charge * (j as f64 - flux_cutoff as f64)).collect();
            let local_e = OperatorMatrix::from_real_diagonal(&flux);
            let local_u = OperatorMatrix::from_triplets(d, (0..d - 1).map(|j| (j + 1, j, c(1.0, 0.0))));
            let e: Vec<_> = (0..space.n_links).map(|l| space.embed_link(l, &local_e)).collect();
            let u: Vec<_> = (0..space.n_links).map(|l| space.embed_link(l, &local_u)).collect();
            let u_dag = u.iter().map(|m| m.adjoint()).collect();
            BosonOps::Electric { e, u, u_dag, local_e, local_u }
        }
    }
}
