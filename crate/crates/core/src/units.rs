//! Physical constants used throughout the crate.
//!
//! Everything defaults to natural units (`c = ε0 = μ0 = ħ = 1`), which keeps
//! the identity checks free of large scale factors. SI is available for
//! users who want dimensional output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsSystem {
    /// Speed of light.
    pub c: f64,
    /// Vacuum permittivity.
    pub eps0: f64,
    /// Vacuum permeability, always stored as `1 / (ε0 c²)`.
    pub mu0: f64,
    /// Reduced Planck constant.
    pub hbar: f64,
}

impl UnitsSystem {
    pub fn natural() -> Self {
        Self::new(1.0, 1.0, 1.0)
    }

    pub fn si() -> Self {
        Self::new(299_792_458.0, 8.854_187_812_8e-12, 1.054_571_817e-34)
    }

    /// Builds a unit system from `c`, `ε0` and `ħ`; `μ0` is derived.
    pub fn new(c: f64, eps0: f64, hbar: f64) -> Self {
        assert!(c > 0.0 && eps0 > 0.0 && hbar > 0.0, "unit constants must be positive");
        Self {
            c,
            eps0,
            mu0: 1.0 / (eps0 * c * c),
            hbar,
        }
    }

    /// `κ0 = 1/μ0`.
    pub fn kappa0(&self) -> f64 {
        1.0 / self.mu0
    }

    /// Same system with `ħ` replaced.
    pub fn with_hbar(self, hbar: f64) -> Self {
        Self::new(self.c, self.eps0, hbar)
    }

    /// Vacuum wavenumber `ω/c`.
    pub fn k0(&self, omega: f64) -> f64 {
        omega / self.c
    }
}

impl Default for UnitsSystem {
    fn default() -> Self {
        Self::natural()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnitsKind {
    #[default]
    Natural,
    Si,
}

impl UnitsKind {
    pub fn system(self) -> UnitsSystem {
        match self {
            UnitsKind::Natural => UnitsSystem::natural(),
            UnitsKind::Si => UnitsSystem::si(),
        }
    }
}

impl std::str::FromStr for UnitsKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Ok(UnitsKind::Natural),
            "si" => Ok(UnitsKind::Si),
            other => Err(format!("unknown units system `{other}` (expected natural|si)")),
        }
    }
}

impl std::fmt::Display for UnitsKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitsKind::Natural => write!(f, "natural"),
            UnitsKind::Si => write!(f, "si"),
        }
    }
}
