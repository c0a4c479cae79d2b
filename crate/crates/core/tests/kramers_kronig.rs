use maxqed::materials::{kk_reconstruct, presets, KkOptions, MaterialModel};
use maxqed::pvquad::FrequencyGrid;
use maxqed::UnitsSystem;
use proptest::prelude::*;
use std::f64::consts::PI;

fn kk_sweep_error(model: &MaterialModel, grid: &FrequencyGrid, opts: &KkOptions) -> f64 {
    let im = grid.sample(|w| model.epsilon(w).im);
    let wt = model.min_resonance().unwrap();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..=100 {
        let w = wt * (0.1 + 4.9 * i as f64 / 100.0);
        let v = kk_reconstruct(grid, &im, w, opts).unwrap();
        let exact = model.epsilon(w).re - 1.0;
        err = err.max((v - exact).abs());
        scale = scale.max(exact.abs());
    }
    err / scale
}

#[test]
fn presets_reconstruct_within_tolerance() {
    for (name, m) in presets() {
        let g = m.kk_grid(400).unwrap();
        let e = kk_sweep_error(&m, &g, &KkOptions::default());
        assert!(e <= 1e-3, "{name}: {e:e}");
    }
}

#[test]
fn narrow_resonance_limit() {
    // ω_p = ω_T = 1 at ω′ = 2: γ → 0 approaches ω_p²/(ω_T² − ω′²) = −1/3
    let mut last = f64::INFINITY;
    for gamma in [0.1, 0.05, 0.025] {
        let m = MaterialModel::electric(&[(1.0, 1.0, gamma)]).unwrap();
        let g = m.kk_grid(400).unwrap();
        let im = g.sample(|w| m.epsilon(w).im);
        let v = kk_reconstruct(&g, &im, 2.0, &KkOptions::default()).unwrap();
        let closed = -3.0 / (9.0 + 4.0 * gamma * gamma);
        assert!((v - closed).abs() < 1e-6, "γ={gamma}: {v} vs {closed}");
        let dist = (v + 1.0 / 3.0).abs();
        assert!(dist < last);
        last = dist;
    }
    assert!(last < 1e-4);
}

#[test]
fn refinement_order_at_least_one_and_a_half() {
    let m = presets().remove(1).1;
    let loose = KkOptions {
        max_relative_spacing: 1.0,
        ..KkOptions::default()
    };
    let errs: Vec<f64> = [120, 240]
        .iter()
        .map(|&p| kk_sweep_error(&m, &m.kk_grid(p).unwrap(), &loose))
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(order >= 1.5, "errors {errs:?}, order {order}");
}

#[test]
fn magnetic_response_is_kk_consistent() {
    let m = MaterialModel::magnetic(&[(0.5, 2.0, 0.2)]).unwrap();
    let g = m.kk_grid(400).unwrap();
    let im = g.sample(|w| m.kappa(w).unwrap().im);
    for w in [0.3, 1.0, 2.1, 5.0] {
        let v = kk_reconstruct(&g, &im, w, &KkOptions::default()).unwrap();
        let exact = m.kappa(w).unwrap().re - 1.0;
        assert!((v - exact).abs() < 1e-6, "ω={w}: {v} vs {exact}");
    }
}

fn pole() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..3.0f64, 0.1..5.0f64, 1e-3..2.0f64)
}

fn model() -> impl Strategy<Value = MaterialModel> {
    (prop::collection::vec(pole(), 0..4), prop::collection::vec(pole(), 0..3))
        .prop_map(|(e, m)| MaterialModel::new(
            e.into_iter().map(|(a, b, c)| maxqed::materials::LorentzPole::new(a, b, c).unwrap()).collect(),
            m.into_iter().map(|(a, b, c)| maxqed::materials::LorentzPole::new(a, b, c).unwrap()).collect(),
        ).unwrap())
}

proptest! {
    #[test]
    fn parity(m in model(), w in 1e-3..20.0f64) {
        prop_assert_eq!(m.epsilon(-w), m.epsilon(w).conj());
        if let (Ok(kp), Ok(km)) = (m.kappa(w), m.kappa(-w)) {
            prop_assert!((km - kp.conj()).norm() <= 1e-15 * kp.norm());
        }
    }

    #[test]
    fn absorption_signs(m in model(), w in 1e-3..20.0f64) {
        let e = m.epsilon(w).im;
        let k = m.kappa(w).unwrap().im;
        if m.electric_poles.iter().any(|p| p.plasma > 0.0) { prop_assert!(e > 0.0); }
        if m.electric_poles.is_empty() { prop_assert_eq!(e, 0.0); }
        if m.magnetic_poles.iter().any(|p| p.plasma > 0.0) { prop_assert!(k < 0.0); }
        if m.magnetic_poles.is_empty() { prop_assert_eq!(k, 0.0); }
    }

    #[test]
    fn couplings_invert_to_losses(m in model(), w in 1e-3..20.0f64, eps0 in 0.1..10.0f64) {
        let u = UnitsSystem::new(1.0, eps0, 1.0);
        let a = m.coupling_alpha(w, &u).unwrap();
        let b = m.coupling_beta(w, &u).unwrap();
        let ei = m.epsilon(w).im;
        let ki = m.kappa(w).unwrap().im;
        prop_assert!((a * a * PI / (2.0 * u.eps0 * w) - ei).abs() <= 1e-14 * ei.abs().max(1e-300) * 4.0);
        prop_assert!((b * b * PI / (2.0 * u.kappa0() * w) + ki).abs() <= 1e-14 * ki.abs().max(1e-300) * 4.0);
    }
}
