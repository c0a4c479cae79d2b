//! Lorentz-pole permittivity and inverse permeability, reservoir couplings,
//! and numerical Kramers–Kronig reconstruction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::pvquad::{pv_integral_sampled, FrequencyGrid, PvError};
use crate::units::UnitsSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("invalid Lorentz pole (wp={wp}, wt={wt}, gamma={gamma}): {reason}")]
    InvalidPole {
        wp: f64,
        wt: f64,
        gamma: f64,
        reason: &'static str,
    },
    #[error("|μ(ω)| = {modulus:e} below floor at ω = {omega}")]
    PoleAtFrequency { omega: f64, modulus: f64 },
    #[error("coupling radicand {value:e} is negative at ω = {omega}")]
    NegativeRadicand { omega: f64, value: f64 },
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("node spacing {spacing} around ω′ = {omega} exceeds {bound} relative to ω′")]
    GridTooCoarse { omega: f64, spacing: f64, bound: f64 },
    #[error(transparent)]
    Quadrature(#[from] PvError),
    #[error("material descriptor: {0}")]
    Descriptor(String),
}

/// One damped oscillator `ω_p²/(ω_T² − ω² − iγω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzPole {
    #[serde(rename = "wp")]
    pub plasma: f64,
    #[serde(rename = "wt")]
    pub resonance: f64,
    pub gamma: f64,
}

impl LorentzPole {
    pub fn new(plasma: f64, resonance: f64, gamma: f64) -> Result<Self, MaterialError> {
        let p = Self {
            plasma,
            resonance,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let bad = |reason| MaterialError::InvalidPole {
            wp: self.plasma,
            wt: self.resonance,
            gamma: self.gamma,
            reason,
        };
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(bad("damping must be positive"));
        }
        if !(self.plasma >= 0.0) || !self.plasma.is_finite() {
            return Err(bad("plasma strength must be nonnegative"));
        }
        if !(self.resonance > 0.0) || !self.resonance.is_finite() {
            return Err(bad("resonance must be positive"));
        }
        Ok(())
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let wp2 = self.plasma * self.plasma;
        wp2 / Complex64::new(self.resonance * self.resonance - omega * omega, -self.gamma * omega)
    }
}

/// Electric poles build `ε`; magnetic poles build `μ`, and `κ = 1/μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    #[serde(default)]
    pub electric_poles: Vec<LorentzPole>,
    #[serde(default)]
    pub magnetic_poles: Vec<LorentzPole>,
    /// Smallest admissible `|μ(ω)|` before `kappa` refuses to invert.
    #[serde(default = "default_mu_floor", skip_serializing)]
    pub mu_floor: f64,
}

fn default_mu_floor() -> f64 {
    1e-12
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl MaterialModel {
    pub fn vacuum() -> Self {
        Self {
            electric_poles: Vec::new(),
            magnetic_poles: Vec::new(),
            mu_floor: default_mu_floor(),
        }
    }

    pub fn new(electric_poles: Vec<LorentzPole>, magnetic_poles: Vec<LorentzPole>) -> Result<Self, MaterialError> {
        let m = Self {
            electric_poles,
            magnetic_poles,
            mu_floor: default_mu_floor(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn electric(poles: &[(f64, f64, f64)]) -> Result<Self, MaterialError> {
        Self::new(to_poles(poles)?, Vec::new())
    }

    pub fn magnetic(poles: &[(f64, f64, f64)]) -> Result<Self, MaterialError> {
        Self::new(Vec::new(), to_poles(poles)?)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        self.electric_poles.iter().chain(&self.magnetic_poles).try_for_each(|p| p.validate())
    }

    /// Parses the JSON descriptor `{"electric_poles":[{"wp","wt","gamma"}], "magnetic_poles":[...]}`.
    pub fn from_json(text: &str) -> Result<Self, MaterialError> {
        let m: Self = serde_json::from_str(text).map_err(|e| MaterialError::Descriptor(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn is_vacuum(&self) -> bool {
        self.electric_poles.is_empty() && self.magnetic_poles.is_empty()
    }

    pub fn is_magnetic(&self) -> bool {
        !self.magnetic_poles.is_empty()
    }

    pub fn is_lossy(&self) -> bool {
        self.electric_poles.iter().chain(&self.magnetic_poles).any(|p| p.plasma > 0.0)
    }

    /// Largest resonance frequency over both pole sets, if any.
    pub fn max_resonance(&self) -> Option<f64> {
        self.electric_poles
            .iter()
            .chain(&self.magnetic_poles)
            .map(|p| p.resonance)
            .reduce(f64::max)
    }

    pub fn min_resonance(&self) -> Option<f64> {
        self.electric_poles
            .iter()
            .chain(&self.magnetic_poles)
            .map(|p| p.resonance)
            .reduce(f64::min)
    }

    /// Relative permittivity.
    pub fn epsilon(&self, omega: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.electric_poles.iter().map(|p| p.response(omega)).sum::<Complex64>()
    }

    /// Relative permeability.
    pub fn mu(&self, omega: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.magnetic_poles.iter().map(|p| p.response(omega)).sum::<Complex64>()
    }

    /// `κ = 1/μ`.
    pub fn kappa(&self, omega: f64) -> Result<Complex64, MaterialError> {
        let mu = self.mu(omega);
        if mu.norm() < self.mu_floor {
            return Err(MaterialError::PoleAtFrequency {
                omega,
                modulus: mu.norm(),
            });
        }
        Ok(mu.inv())
    }

    /// Electric reservoir coupling `α(ω) = sqrt(2ε0 ω ε_I / π)`.
    pub fn coupling_alpha(&self, omega: f64, units: &UnitsSystem) -> Result<f64, MaterialError> {
        if !(omega > 0.0) {
            return Err(MaterialError::NonPositiveFrequency(omega));
        }
        checked_sqrt(omega, 2.0 * units.eps0 * omega * self.epsilon(omega).im / PI)
    }

    /// Magnetic reservoir coupling `β(ω) = sqrt(−2κ0 ω κ_I / π)`.
    pub fn coupling_beta(&self, omega: f64, units: &UnitsSystem) -> Result<f64, MaterialError> {
        if !(omega > 0.0) {
            return Err(MaterialError::NonPositiveFrequency(omega));
        }
        let kappa = self.kappa(omega)?;
        checked_sqrt(omega, -2.0 * units.kappa0() * omega * kappa.im / PI)
    }

    /// Default grid for Kramers–Kronig integrals: linear near zero, then
    /// log-spaced 8-node panels up to 100× the largest resonance. Low-order
    /// panels are a poor fit here: the pole value is interpolated from the
    /// panel samples, and its error is divided by the distance to the
    /// nearest node.
    pub fn kk_grid(&self, panels: usize) -> Result<FrequencyGrid, MaterialError> {
        let top = self.max_resonance().unwrap_or(1.0);
        let bottom = self.min_resonance().unwrap_or(1.0);
        Ok(FrequencyGrid::log_from_zero(1e-3 * bottom, 100.0 * top, panels, 8)?)
    }
}

/// Named models shared by the verification suite and the CLI.
pub fn presets() -> Vec<(&'static str, MaterialModel)> {
    vec![
        ("single-lorentz", MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap()),
        (
            "two-pole",
            MaterialModel::electric(&[(0.8, 1.0, 0.05), (1.5, 3.0, 0.3)]).unwrap(),
        ),
        ("broad-lorentz", MaterialModel::electric(&[(2.0, 1.0, 0.5)]).unwrap()),
    ]
}

pub fn preset(name: &str) -> Option<MaterialModel> {
    presets().into_iter().find(|(n, _)| *n == name).map(|(_, m)| m)
}

fn to_poles(poles: &[(f64, f64, f64)]) -> Result<Vec<LorentzPole>, MaterialError> {
    poles.iter().map(|&(p, r, g)| LorentzPole::new(p, r, g)).collect()
}

fn checked_sqrt(omega: f64, value: f64) -> Result<f64, MaterialError> {
    // rounding can leave a lossless channel at -0.0 or a hair below
    if value < -1e-300 {
        return Err(MaterialError::NegativeRadicand { omega, value });
    }
    Ok(value.max(0.0).sqrt())
}

/// Tunables for [`kk_reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KkOptions {
    /// Largest allowed `node spacing / ω′` in the panel holding the pole,
    /// with node spacing taken as panel width over nodes per panel.
    pub max_relative_spacing: f64,
    /// Add the analytic `1/ω³` tail beyond the top of the grid.
    pub tail_correction: bool,
}

impl Default for KkOptions {
    fn default() -> Self {
        Self {
            max_relative_spacing: 0.01,
            tail_correction: true,
        }
    }
}

/// Real part minus one of a causal response, from its imaginary part
/// sampled on `grid`: `(2/π) P∫ ω Im(ω)/(ω² − ω′²) dω`.
///
/// Works for any response with the Lorentz `1/ω³` decay of the imaginary
/// part; pass `ε_I` to get `ε_R − 1`, `κ_I` to get `κ_R − 1`. Beyond the grid
/// the tail is integrated in closed form with `Im ≈ C/ω³`, `C` fixed by the
/// last sample.
pub fn kk_reconstruct(
    grid: &FrequencyGrid,
    im_samples: &[f64],
    omega_prime: f64,
    opts: &KkOptions,
) -> Result<f64, MaterialError> {
    if im_samples.len() != grid.len() {
        return Err(PvError::SampleMismatch {
            expected: grid.len(),
            got: im_samples.len(),
        }
        .into());
    }
    if !(omega_prime > 0.0) {
        return Err(MaterialError::NonPositiveFrequency(omega_prime));
    }
    if let Some(panel) = grid.panel_of(omega_prime) {
        let (a, b) = grid.panel_bounds(panel);
        let spacing = (b - a) / grid.order() as f64;
        if spacing / omega_prime > opts.max_relative_spacing {
            return Err(MaterialError::GridTooCoarse {
                omega: omega_prime,
                spacing,
                bound: opts.max_relative_spacing,
            });
        }
    }
    let reduced: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(im_samples)
        .map(|(&w, &im)| w * im / (w + omega_prime))
        .collect();
    let mut integral = pv_integral_sampled(grid, &reduced, omega_prime)?;
    if opts.tail_correction {
        let last = grid.len() - 1;
        let w_last = grid.nodes()[last];
        let c = im_samples[last] * w_last.powi(3);
        integral += tail_integral(c, grid.upper(), omega_prime);
    }
    Ok(2.0 / PI * integral)
}

/// `∫_W^∞ C/(ω²(ω² − a²)) dω` for `W > a > 0`.
fn tail_integral(c: f64, w: f64, a: f64) -> f64 {
    let x = a / w;
    if x < 1e-3 {
        // series avoids cancellation: Σ_k a^{2k}/((2k+3) W^{2k+3})
        let mut sum = 0.0;
        let mut term = 1.0 / w.powi(3);
        for k in 0..6 {
            sum += term / (2 * k + 3) as f64;
            term *= x * x;
        }
        return c * sum;
    }
    c / (a * a) * (((w + a) / (w - a)).ln() / (2.0 * a) - 1.0 / w)
}
