use num_complex::Complex64;
use std::f64::consts::PI;

use super::{pv_integral_on_grid, FrequencyGrid, PvError};

/// Coefficient of one delta function in a pole decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaTerm {
    pub weight: Complex64,
    /// False when the delta's argument cannot vanish for `ω > 0`.
    pub active: bool,
}

/// Decomposition of `1/(ω² − (ω′ + i0⁺)²)` for `ω > 0` into a principal-value
/// kernel and delta functions at `ω = ω′` and `ω = −ω′`:
///
/// `(1/2ω)[P 1/(ω−ω′) + sgn(ω′) iπ δ(ω−ω′) + P 1/(ω+ω′) + sgn(ω′) iπ δ(ω+ω′)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSplit {
    /// `P 1/(ω²−ω′²)` sampled at `ω`; `None` when `ω = |ω′|`, where only the
    /// principal-value limit is meaningful.
    pub pv_kernel: Option<f64>,
    /// Coefficient of `δ(ω − ω′)`.
    pub at_difference: DeltaTerm,
    /// Coefficient of `δ(ω + ω′)`.
    pub at_sum: DeltaTerm,
}

/// Splits the pole prescription at the sample point `(ω, ω′)`.
///
/// `η` only stands in for the infinitesimal; it is used to decide whether
/// `ω` coincides with `|ω′|`. Returns `None` for `ω ≤ 0`, where the split
/// used for the reservoir solutions does not apply.
pub fn sokhotski_split(omega: f64, omega_prime: f64, eta: f64) -> Option<PoleSplit> {
    if !(omega > 0.0) {
        return None;
    }
    let sign = if omega_prime >= 0.0 { 1.0 } else { -1.0 };
    let coeff = Complex64::new(0.0, sign * PI / (2.0 * omega));
    let coincident = (omega - omega_prime.abs()).abs() <= eta.abs().max(f64::EPSILON * omega);
    Some(PoleSplit {
        pv_kernel: (!coincident).then(|| 1.0 / (omega * omega - omega_prime * omega_prime)),
        at_difference: DeltaTerm {
            weight: coeff,
            active: omega_prime > 0.0,
        },
        at_sum: DeltaTerm {
            weight: coeff,
            active: omega_prime < 0.0,
        },
    })
}

/// `∫ f(ω)/(ω² − (ω′+i0⁺)²) dω` over the grid, evaluated through the split:
/// the principal value is done by subtraction of the singularity and the
/// active delta is consumed analytically.
pub fn split_integral<F: Fn(f64) -> f64>(f: F, omega_prime: f64, grid: &FrequencyGrid) -> Result<Complex64, PvError> {
    let pole = omega_prime.abs();
    let pv = pv_integral_on_grid(grid, |w| f(w) / (w + pole), pole)?;
    let split = sokhotski_split(pole, omega_prime, 0.0).expect("pole is positive");
    let delta = if split.at_difference.active {
        split.at_difference.weight
    } else {
        split.at_sum.weight
    };
    Ok(Complex64::new(pv, 0.0) + delta * f(pole))
}
