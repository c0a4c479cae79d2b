//! Partial-fraction identities for products of pole prescriptions.
//!
//! Each identity rewrites a product of two regularized poles in `ω″` as a
//! difference of single poles. With the infinitesimal replaced by a finite
//! `η > 0` they are exact rational identities, so the residual of a correct
//! evaluation sits at rounding level regardless of `η`.

use num_complex::Complex64;

use super::PvError;

/// The eight identities. `A*` mix prescriptions of opposite sign (used for
/// the `[C, C†]` condition), `B*` share the same sign (`[C, C]` condition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoleIdentity {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    B3,
    B4,
}

impl PoleIdentity {
    pub const ALL: [PoleIdentity; 8] = [
        PoleIdentity::A1,
        PoleIdentity::A2,
        PoleIdentity::A3,
        PoleIdentity::A4,
        PoleIdentity::B1,
        PoleIdentity::B2,
        PoleIdentity::B3,
        PoleIdentity::B4,
    ];
    pub const A: [PoleIdentity; 4] = [PoleIdentity::A1, PoleIdentity::A2, PoleIdentity::A3, PoleIdentity::A4];
    pub const B: [PoleIdentity; 4] = [PoleIdentity::B1, PoleIdentity::B2, PoleIdentity::B3, PoleIdentity::B4];

    pub fn name(self) -> &'static str {
        match self {
            PoleIdentity::A1 => "A1",
            PoleIdentity::A2 => "A2",
            PoleIdentity::A3 => "A3",
            PoleIdentity::A4 => "A4",
            PoleIdentity::B1 => "B1",
            PoleIdentity::B2 => "B2",
            PoleIdentity::B3 => "B3",
            PoleIdentity::B4 => "B4",
        }
    }

    /// Whether the right-hand side carries an unregularized `1/(ω−ω′)`.
    pub fn divides_by_difference(self) -> bool {
        matches!(self, PoleIdentity::B1 | PoleIdentity::B4)
    }

    /// Relative residual `|LHS − RHS| / scale`, where `scale` is the largest
    /// magnitude among the left side and the two expanded right-side terms.
    ///
    /// The frequencies are `(ω, ω′, ω″)`; `η` replaces `0⁺`.
    pub fn residual(self, omega: f64, omega_p: f64, omega_pp: f64, eta: f64) -> Complex64 {
        let i = Complex64::i();
        let ie = i * eta;
        let x = Complex64::new(omega_pp, 0.0);
        let (w, wp) = (omega, omega_p);
        // (first factor, second factor, prefactor, first rhs pole, second rhs pole)
        let (d1, d2, pre, r1, r2) = match self {
            PoleIdentity::A1 => (x - w + ie, x - wp - ie, w - wp - 2.0 * ie, x - w + ie, x - wp - ie),
            PoleIdentity::A2 => (x - w + ie, x + wp - ie, w + wp - 2.0 * ie, x - w + ie, x + wp - ie),
            PoleIdentity::A3 => (x + w + ie, x - wp - ie, w + wp + 2.0 * ie, x - wp - ie, x + w + ie),
            PoleIdentity::A4 => (x + w + ie, x + wp - ie, w - wp + 2.0 * ie, x + wp - ie, x + w + ie),
            PoleIdentity::B1 => (x - w + ie, x - wp + ie, (w - wp).into(), x - w + ie, x - wp + ie),
            PoleIdentity::B2 => (x - w + ie, x + wp + ie, (w + wp).into(), x - w + ie, x + wp + ie),
            PoleIdentity::B3 => (x + w + ie, x - wp + ie, (w + wp).into(), x - wp + ie, x + w + ie),
            PoleIdentity::B4 => (x + w + ie, x + wp + ie, (w - wp).into(), x + wp + ie, x + w + ie),
        };
        let lhs = 1.0 / (d1 * d2);
        let t1 = 1.0 / (pre * r1);
        let t2 = 1.0 / (pre * r2);
        let rhs = t1 - t2;
        let scale = lhs.norm().max(t1.norm()).max(t2.norm()).max(f64::MIN_POSITIVE);
        (lhs - rhs) / scale
    }
}

/// Largest residual (by modulus) of the four opposite-sign identities.
pub fn pole_identity_a(omega: f64, omega_p: f64, omega_pp: f64, eta: f64) -> Complex64 {
    max_residual(PoleIdentity::A.iter().map(|id| id.residual(omega, omega_p, omega_pp, eta)))
}

/// Largest residual of the four same-sign identities. Fails with
/// [`PvError::DegeneratePair`] when `|ω−ω′|` is below `floor`, since two of
/// them divide by it without a prescription; use [`PoleIdentity::residual`]
/// on `B2`/`B3` for that case.
pub fn pole_identity_b(omega: f64, omega_p: f64, omega_pp: f64, eta: f64, floor: f64) -> Result<Complex64, PvError> {
    if (omega - omega_p).abs() < floor {
        return Err(PvError::DegeneratePair {
            omega,
            omega_prime: omega_p,
            floor,
        });
    }
    Ok(max_residual(
        PoleIdentity::B.iter().map(|id| id.residual(omega, omega_p, omega_pp, eta)),
    ))
}

fn max_residual(it: impl Iterator<Item = Complex64>) -> Complex64 {
    it.fold(Complex64::new(0.0, 0.0), |acc, r| if r.norm() > acc.norm() { r } else { acc })
}
