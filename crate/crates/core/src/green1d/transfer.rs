//! Continuum transfer matrices for normal incidence on a layer stack.
//! Independent of the finite-difference solver; used as its oracle and for
//! slab transmission.

use num_complex::Complex64;

use super::{medium_wavenumber, GreenError, LayerStack};
use crate::units::UnitsSystem;

/// Amplitude reflection and transmission for a unit wave incident from the
/// left. `r` is referred to the first interface, `t` to the last one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub r: Complex64,
    pub t: Complex64,
}

/// Solves the stack with continuity of `E` and `κ ∂_z E` at each interface.
pub fn scattering(stack: &LayerStack, omega: f64, units: &UnitsSystem) -> Result<Scattering, GreenError> {
    let layers = stack.layers();
    let n = layers.len();
    let mut k = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for l in layers {
        let eps = l.material.epsilon(omega);
        let kappa = l.material.kappa(omega)?;
        let kk = medium_wavenumber(eps, kappa, omega, units)?;
        k.push(kk);
        y.push(kappa * kk);
    }
    // amplitudes (a, b) of e^{±ik(z − z_left)} in each layer; right half-space carries (1, 0)
    let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let i = Complex64::i();
    for m in (0..n - 1).rev() {
        // field and flux just right of the interface between m and m+1
        let e = a + b;
        let f = i * y[m + 1] * (a - b);
        let g = f / (i * y[m]);
        let phase = if m == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            (i * k[m] * layers[m].thickness).exp()
        };
        a = 0.5 * (e + g) / phase;
        b = 0.5 * (e - g) * phase;
    }
    Ok(Scattering { r: b / a, t: 1.0 / a })
}

/// Reflection at a single interface, `(κ₁k₁ − κ₂k₂)/(κ₁k₁ + κ₂k₂)`.
pub fn interface_reflection(
    left: (Complex64, Complex64),
    right: (Complex64, Complex64),
    omega: f64,
    units: &UnitsSystem,
) -> Result<Complex64, GreenError> {
    let y1 = left.1 * medium_wavenumber(left.0, left.1, omega, units)?;
    let y2 = right.1 * medium_wavenumber(right.0, right.1, omega, units)?;
    Ok((y1 - y2) / (y1 + y2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialModel;

    #[test]
    fn vacuum_is_transparent() {
        let s = LayerStack::slab(MaterialModel::vacuum(), MaterialModel::vacuum(), 2.0).unwrap();
        let sc = scattering(&s, 1.3, &UnitsSystem::natural()).unwrap();
        assert!(sc.r.norm() < 1e-15);
        // t is referred to the last interface, so it carries the slab phase
        assert!((sc.t - Complex64::new(0.0, 2.6).exp()).norm() < 1e-14);
    }

    #[test]
    fn single_interface_matches_fresnel() {
        let m = MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap();
        let u = UnitsSystem::natural();
        let s = LayerStack::interface(MaterialModel::vacuum(), m.clone());
        let sc = scattering(&s, 0.7, &u).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let r = interface_reflection((one, one), (m.epsilon(0.7), one), 0.7, &u).unwrap();
        assert!((sc.r - r).norm() < 1e-15);
        assert!((sc.t - (1.0 + r)).norm() < 1e-15);
    }

    #[test]
    fn lossless_slab_conserves_flux() {
        // ε ≈ 4 from a far-detuned pole with negligible damping, checked against the Airy formula
        let n2: f64 = 2.0;
        let d = 0.8;
        let w = 1.1;
        let u = UnitsSystem::natural();
        let wt: f64 = 50.0;
        let wp = ((n2 * n2 - 1.0) * (wt * wt - w * w)).sqrt();
        let m = MaterialModel::electric(&[(wp, wt, 1e-12)]).unwrap();
        let sc = scattering(&LayerStack::slab(MaterialModel::vacuum(), m, d).unwrap(), w, &u).unwrap();
        assert!((sc.r.norm_sqr() + sc.t.norm_sqr() - 1.0).abs() < 1e-9);
        let r12 = (1.0 - n2) / (1.0 + n2);
        let ph = Complex64::new(0.0, 2.0 * n2 * w * d).exp();
        let airy = r12 * (1.0 - ph) / (1.0 - r12 * r12 * ph);
        assert!((sc.r - airy).norm() < 1e-9);
    }
}
