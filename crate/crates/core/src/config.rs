//! Physical and numerical parameters of one lattice run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIM_CAP: u64 = 1 << 22;

/// Representation of each link's gauge degree of freedom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BosonBasis {
    /// Truncated harmonic-oscillator number basis for the non-compact pair
    /// `(A, E)`; `omega` only fixes the basis, not the physics.
    Oscillator {
        n_max: usize,
        #[serde(default = "default_omega")]
        omega: f64,
    },
    /// Electric-flux eigenbasis `n ∈ {−L, …, L}` with link raising operators.
    Electric { flux_cutoff: usize },
}

impl BosonBasis {
    pub fn dim_per_link(&self) -> usize {
        match *self {
            BosonBasis::Oscillator { n_max, .. } => n_max + 1,
            BosonBasis::Electric { flux_cutoff } => 2 * flux_cutoff + 1,
        }
    }

    pub fn size_parameter(&self) -> usize {
        match *self {
            BosonBasis::Oscillator { n_max, .. } => n_max,
            BosonBasis::Electric { flux_cutoff } => flux_cutoff,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `−a Σ_l J_l A_l` added to the free Hamiltonian.
    Linear,
    /// Link operators inserted into the hopping term.
    Covariant,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::Linear => "linear",
            Coupling::Covariant => "covariant",
        }
    }

    pub fn variant_label(self) -> &'static str {
        match self {
            Coupling::Linear => "linear/oscillator",
            Coupling::Covariant => "covariant/electric",
        }
    }
}

fn default_omega() -> f64 {
    1.0
}
fn default_spacing() -> f64 {
    1.0
}
fn default_mass() -> f64 {
    1.0
}
fn default_charge() -> f64 {
    1.0
}
fn default_penalty() -> f64 {
    10.0
}
fn default_bch_order() -> usize {
    3
}
fn default_tol() -> f64 {
    1e-10
}
fn default_seed() -> u64 {
    1
}
fn default_dim_cap() -> u64 {
    DEFAULT_DIM_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_sites: usize,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_charge")]
    pub charge: f64,
    pub boson_basis: BosonBasis,
    pub coupling: Coupling,
    #[serde(default = "default_penalty")]
    pub penalty_lambda: f64,
    #[serde(default = "default_bch_order")]
    pub bch_order: usize,
    #[serde(default = "default_tol")]
    pub tol_exact: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("coupling: the {} coupling requires the {required} boson basis (pairing rule: linear with oscillator, covariant with electric)", .coupling.name())]
    VariantPairing { coupling: Coupling, required: &'static str },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

impl LatticeConfig {
    /// Two-site electric chain with covariant coupling, `a = m = q = 1`.
    pub fn electric(n_sites: usize, flux_cutoff: usize) -> Self {
        Self {
            n_sites,
            spacing: 1.0,
            mass: 1.0,
            charge: 1.0,
            boson_basis: BosonBasis::Electric { flux_cutoff },
            coupling: Coupling::Covariant,
            penalty_lambda: default_penalty(),
            bch_order: default_bch_order(),
            tol_exact: default_tol(),
            seed: default_seed(),
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn oscillator(n_sites: usize, n_max: usize) -> Self {
        Self {
            boson_basis: BosonBasis::Oscillator { n_max, omega: 1.0 },
            coupling: Coupling::Linear,
            ..Self::electric(n_sites, 1)
        }
    }

    pub fn is_electric(&self) -> bool {
        matches!(self.boson_basis, BosonBasis::Electric { .. })
    }

    pub fn variant_label(&self) -> &'static str {
        self.coupling.variant_label()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_sites < 2 {
            return Err(invalid("n_sites", "n_sites ≥ 2"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(invalid("spacing", "lattice spacing must be positive"));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(invalid("mass", "mass must be nonnegative"));
        }
        if !self.charge.is_finite() {
            return Err(invalid("charge", "charge must be finite"));
        }
        match self.boson_basis {
            BosonBasis::Oscillator { n_max, omega } => {
                if n_max < 1 {
                    return Err(invalid("boson_basis.n_max", "n_max ≥ 1"));
                }
                if !(omega > 0.0 && omega.is_finite()) {
                    return Err(invalid("boson_basis.omega", "omega must be positive"));
                }
                if self.coupling != Coupling::Linear {
                    return Err(ConfigError::VariantPairing { coupling: self.coupling, required: "electric" });
                }
            }
            BosonBasis::Electric { flux_cutoff } => {
                if flux_cutoff < 1 {
                    return Err(invalid("boson_basis.flux_cutoff", "flux_cutoff ≥ 1"));
                }
                if self.charge == 0.0 {
                    return Err(invalid("charge", "the electric basis needs charge ≠ 0 (flux eigenvalues are multiples of q)"));
                }
                if self.coupling != Coupling::Covariant {
                    return Err(ConfigError::VariantPairing { coupling: self.coupling, required: "oscillator" });
                }
            }
        }
        if !(self.penalty_lambda > 0.0) {
            return Err(invalid("penalty_lambda", "penalty_lambda must be positive"));
        }
        if self.bch_order < 1 {
            return Err(invalid("bch_order", "bch_order ≥ 1"));
        }
        if !(self.tol_exact > 0.0) {
            return Err(invalid("tol_exact", "tol_exact must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in_from_json() {
        let cfg: LatticeConfig = serde_json::from_str(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant"}"#,
        )
        .unwrap();
        assert_eq!(cfg, LatticeConfig::electric(2, 1));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = serde_json::from_str::<LatticeConfig>(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant", "colour": 3}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn pairing_rule_is_enforced() {
        let mut cfg = LatticeConfig::oscillator(2, 3);
        cfg.coupling = Coupling::Covariant;
        assert!(matches!(cfg.validate(), Err(ConfigError::VariantPairing { .. })));
        let mut cfg = LatticeConfig::electric(2, 1);
        cfg.coupling = Coupling::Linear;
        assert!(matches!(cfg.validate(), Err(ConfigError::VariantPairing { .. })));
    }

    #[test]
    fn electric_needs_charge() {
        let mut cfg = LatticeConfig::electric(2, 1);
        cfg.charge = 0.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().starts_with("charge"));
        let mut osc = LatticeConfig::oscillator(2, 2);
        osc.charge = 0.0;
        osc.validate().unwrap();
    }

    #[test]
    fn single_site_is_refused() {
        let err = LatticeConfig::electric(1, 1).validate().unwrap_err();
        assert_eq!(err.to_string(), "n_sites: n_sites ≥ 2");
    }
}
