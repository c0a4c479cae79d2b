use maxqed::materials::MaterialModel;
use maxqed::pvquad::{
    gauss_legendre, pole_identity_a, pole_identity_b, pv_integral, split_integral, FrequencyGrid, PoleIdentity,
};
use maxqed::UnitsSystem;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct quadrature of `∫_a^b f(ω)/(ω² − (ω′+iη)²) dω` on a mesh graded
/// geometrically towards `ω′`, fine enough to resolve the width `η`.
fn regularized_integral(f: impl Fn(f64) -> f64, pole: f64, eta: f64, a: f64, b: f64) -> Complex64 {
    let mut bp = vec![a, b];
    let mut d = eta / 8.0;
    while d < (pole - a).min(b - pole) {
        bp.push(pole - d);
        bp.push(pole + d);
        d *= 1.5;
    }
    bp.push(pole);
    bp.sort_by(f64::total_cmp);
    let (x, w) = gauss_legendre(12);
    let z = Complex64::new(pole, eta);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in bp.windows(2) {
        let sub = ((p[1] - p[0]) / 0.05).ceil().max(1.0) as usize;
        let len = (p[1] - p[0]) / sub as f64;
        for s in 0..sub {
            let lo = p[0] + s as f64 * len;
            for (xi, wi) in x.iter().zip(&w) {
                let om = lo + 0.5 * len * (xi + 1.0);
                sum += 0.5 * len * wi * f(om) / (om * om - z * z);
            }
        }
    }
    sum
}

#[test]
fn split_matches_eta_extrapolation() {
    let f = |w: f64| w * w * (-w).exp();
    let (a, b) = (0.0, 40.0);
    let grid = FrequencyGrid::uniform(a, b, 400, 3).unwrap();
    for pole in [0.7, 2.3] {
        let split = split_integral(f, pole, &grid).unwrap();
        let vals: Vec<Complex64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| regularized_integral(f, pole, e, a, b))
            .collect();
        // quadratic Richardson through η = 1e-2, 1e-3, 1e-4 evaluated at η = 0
        let (h0, h1, h2) = (1e-2, 1e-3, 1e-4);
        let l0 = h1 * h2 / ((h0 - h1) * (h0 - h2));
        let l1 = h0 * h2 / ((h1 - h0) * (h1 - h2));
        let l2 = h0 * h1 / ((h2 - h0) * (h2 - h1));
        let extrap = l0 * vals[0] + l1 * vals[1] + l2 * vals[2];
        assert!((split - extrap).norm() <= 1e-6, "pole {pole}: {split} vs {extrap}");
    }
}

#[test]
fn split_against_lorentz_coupling_rebuilds_permittivity() {
    // ε(ω′) − 1 = (1/ε0) ∫ α²(ω)/(ω² − (ω′+i0⁺)²) dω
    let m = MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap();
    let u = UnitsSystem::natural();
    let grid = m.kk_grid(400).unwrap();
    for wp in [0.4, 0.95, 1.6] {
        let v = split_integral(|w| m.coupling_alpha(w, &u).unwrap().powi(2) / u.eps0, wp, &grid).unwrap();
        let exact = m.epsilon(wp) - 1.0;
        assert!((v - exact).norm() <= 1e-5 * exact.norm(), "ω′={wp}: {v} vs {exact}");
    }
}

#[test]
fn lorentz_pv_closed_form() {
    // P∫ ω ε_I/(ω² − ω′²) = (π/2)(ε_R − 1)
    let m = MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap();
    let wp = 0.8;
    let v = pv_integral(|w| w * m.epsilon(w).im / (w + wp), wp, 0.0, 400.0, 40_000).unwrap();
    let exact = std::f64::consts::FRAC_PI_2 * (m.epsilon(wp).re - 1.0);
    assert!((v - exact).abs() < 1e-5 * exact.abs(), "{v} {exact}");
}

#[test]
fn randomized_identity_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (w, wp, wpp): (f64, f64, f64) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        for eta in [1e-1, 1e-4] {
            worst = worst.max(pole_identity_a(w, wp, wpp, eta).norm());
            worst = worst.max(pole_identity_b(w, wp, wpp, eta, 1e-12).unwrap().norm());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

proptest! {
    #[test]
    fn every_identity_holds(w in 1e-3..10.0f64, wp in 1e-3..10.0f64, wpp in 1e-3..10.0f64, log_eta in -6.0..0.0f64) {
        let eta = 10f64.powf(log_eta);
        for id in PoleIdentity::ALL {
            if id.divides_by_difference() && (w - wp).abs() < 1e-12 { continue; }
            prop_assert!(id.residual(w, wp, wpp, eta).norm() <= 1e-10, "{}", id.name());
        }
    }

    #[test]
    fn pv_is_linear(c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, pole in 0.5..1.5f64) {
        let f = |w: f64| w.sin();
        let g = |w: f64| (w * w + 1.0).recip();
        let lhs = pv_integral(|w| c1 * f(w) + c2 * g(w), pole, 0.0, 2.0, 50).unwrap();
        let rhs = c1 * pv_integral(f, pole, 0.0, 2.0, 50).unwrap() + c2 * pv_integral(g, pole, 0.0, 2.0, 50).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn pv_reflection_antisymmetry(pole in 1.0..1.5f64, half in 0.2..0.45f64) {
        // f(ω) ↦ f(2ω0 − ω) on the mirrored interval flips the sign
        let f = |w: f64| (w * 1.3).exp() + w;
        let (a, b) = (pole - half, pole + 2.0 * half);
        let direct = pv_integral(f, pole, a, b, 40).unwrap();
        let mirrored = pv_integral(|w| f(2.0 * pole - w), pole, 2.0 * pole - b, 2.0 * pole - a, 40).unwrap();
        prop_assert!((direct + mirrored).abs() <= 1e-10 * direct.abs().max(1.0));
    }
}
