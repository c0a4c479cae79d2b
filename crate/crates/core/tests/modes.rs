use maxqed::green1d::{homogeneous_green, Grid1D, LayerStack};
use maxqed::materials::MaterialModel;
use maxqed::modes::*;
use maxqed::UnitsSystem;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn electric() -> MaterialModel {
    MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap()
}

fn magnetic() -> MaterialModel {
    MaterialModel::magnetic(&[(1.0, 1.0, 0.1)]).unwrap()
}

fn combined() -> MaterialModel {
    let mut m = MaterialModel::electric(&[(0.8, 1.0, 0.05)]).unwrap();
    m.magnetic_poles = MaterialModel::magnetic(&[(0.6, 1.3, 0.2)]).unwrap().magnetic_poles;
    m
}

fn in_vacuum(m: MaterialModel) -> LayerStack {
    LayerStack::slab(MaterialModel::vacuum(), m, 1.0).unwrap()
}

fn fdt_at(stack: &LayerStack, omega: f64, h: f64, flux: ExteriorFlux) -> f64 {
    let u = UnitsSystem::natural();
    let grid = Grid1D::covering(stack, h, 0.5).unwrap();
    let (bundle, green) = mode_fe(stack, omega, &grid, &u).unwrap();
    fdt_relative_residual(&fdt_identity_check(&bundle, &green, flux), &green)
}

#[test]
fn fdt_holds_for_each_loss_channel() {
    for (name, m) in [("electric", electric()), ("magnetic", magnetic()), ("combined", combined())] {
        let s = in_vacuum(m);
        let r: Vec<f64> = [0.01, 0.005, 0.0025].iter().map(|&h| fdt_at(&s, 1.0, h, ExteriorFlux::Continuum)).collect();
        assert!(r[2] <= 1e-6, "{name}: {r:?}");
        for w in r.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.1, "{name}: order {order}");
        }
    }
}

#[test]
fn lattice_flux_closes_identity_exactly() {
    // the discrete Green identity: with the lattice's own radiated flux the
    // only error left is rounding
    for m in [electric(), magnetic(), combined()] {
        assert!(fdt_at(&in_vacuum(m), 1.3, 0.02, ExteriorFlux::Lattice) < 1e-10);
    }
}

#[test]
fn bundle_route_matches_direct_green_route() {
    let u = UnitsSystem::natural().with_hbar(0.37);
    let s = in_vacuum(combined());
    let grid = Grid1D::covering(&s, 0.02, 0.3).unwrap();
    let (bundle, green) = mode_fe(&s, 0.9, &grid, &u).unwrap();
    let a = fdt_identity_check(&bundle, &green, ExteriorFlux::Continuum);
    let b = fdt_identity_direct(&green, ExteriorFlux::Continuum);
    let scale = green.kernel.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!((a - b).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12 * scale);
}

#[test]
fn nonmagnetic_fdt_has_no_magnetic_part() {
    let s = in_vacuum(electric());
    let grid = Grid1D::covering(&s, 0.02, 0.3).unwrap();
    let (bundle, _) = mode_fe(&s, 1.0, &grid, &UnitsSystem::natural()).unwrap();
    assert!(bundle.magnetic.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

#[test]
fn absorbing_exterior_needs_no_flux_term() {
    // a lossy half-space on both sides swallows everything, so the interior
    // sums alone approach Im g once the grid reaches deep enough
    let s = LayerStack::homogeneous(MaterialModel::electric(&[(1.0, 1.0, 0.5)]).unwrap());
    let grid = Grid1D::spanning(-15.0, 15.0, 0.05).unwrap();
    let u = UnitsSystem::natural();
    let (bundle, green) = mode_fe(&s, 1.0, &grid, &u).unwrap();
    let r = fdt_identity_check(&bundle, &green, ExteriorFlux::None);
    let mid = grid.nearest(0.0);
    assert!(r[(mid, mid)].norm() < 1e-6 * green.kernel[(mid, mid)].im);
}

#[test]
fn mode_equation_is_satisfied() {
    let s = in_vacuum(combined());
    let grid = Grid1D::covering(&s, 0.02, 0.3).unwrap();
    for (omega, hbar) in [(0.5, 1.0), (1.0, 0.3), (2.5, 7.0)] {
        let (bundle, green) = mode_fe(&s, omega, &grid, &UnitsSystem::natural().with_hbar(hbar)).unwrap();
        assert!(mode_equation_residual(&bundle, &green.operator) <= 1e-8);
    }
}

#[test]
fn kernels_scale_with_root_hbar() {
    let s = in_vacuum(combined());
    let grid = Grid1D::covering(&s, 0.05, 0.3).unwrap();
    let (a, _) = mode_fe(&s, 1.1, &grid, &UnitsSystem::natural()).unwrap();
    let (b, _) = mode_fe(&s, 1.1, &grid, &UnitsSystem::natural().with_hbar(4.0)).unwrap();
    let two = Complex64::new(2.0, 0.0);
    assert!((&b.electric - &a.electric * two).norm() < 1e-12 * a.electric.norm());
    assert!((&b.magnetic - &a.magnetic * two).norm() < 1e-12 * a.magnetic.norm());
    assert!((b.normalization - 2.0 * a.normalization).abs() < 1e-15);
}

#[test]
fn hcon_normalization_is_exact() {
    let s = in_vacuum(combined());
    for omega in [0.3, 1.0, 4.0] {
        let grid = Grid1D::covering(&s, 0.05, 0.3).unwrap();
        let (b, _) = mode_fe(&s, omega, &grid, &UnitsSystem::natural()).unwrap();
        assert!(hcon_residual(&b) < 1e-14);
    }
}

fn is_hermitian(m: &DMatrix<Complex64>) -> bool {
    (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max) <= 1e-14 * m.norm().max(1e-300)
}

#[test]
fn noise_kernel_is_hermitian_psd_and_matches_sources() {
    let u = UnitsSystem::natural();
    let s = in_vacuum(combined());
    let grid = Grid1D::covering(&s, 0.05, 0.3).unwrap();
    let op = maxqed::green1d::DiscreteOperator::assemble(&s, &grid, 1.2, &u).unwrap();
    let k = noise_kernel(&op, &u);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for part in [&k.electric, &k.magnetic] {
        assert!(is_hermitian(part));
        for _ in 0..100 {
            let x = DMatrix::from_fn(grid.len(), 1, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let q = (x.adjoint() * part * &x)[(0, 0)];
            assert!(q.re >= -1e-12 * part.norm() && q.im.abs() <= 1e-10 * part.norm());
        }
    }
    let rebuilt = noise_kernel_from_sources(&source_kernels(&op, &u), grid.h());
    assert!((rebuilt - k.total()).norm() < 1e-12 * k.total().norm());
}

#[test]
fn vacuum_noise_is_zero() {
    let u = UnitsSystem::natural();
    let s = LayerStack::homogeneous(MaterialModel::vacuum());
    let grid = Grid1D::spanning(-1.0, 1.0, 0.1).unwrap();
    let op = maxqed::green1d::DiscreteOperator::assemble(&s, &grid, 1.0, &u).unwrap();
    assert_eq!(noise_kernel(&op, &u).total().norm(), 0.0);
    assert_eq!(charge_conservation_check(&op, &u), 0.0);
}

#[test]
fn vacuum_spectrum_free_space_value() {
    // Im g(z, z) = 1/(2k0) in free space
    let u = UnitsSystem::natural();
    let s = LayerStack::homogeneous(MaterialModel::vacuum());
    let grid = Grid1D::spanning(-1.0, 1.0, 0.005).unwrap();
    let w = 1.5;
    let green = maxqed::green1d::solve_green(&s, w, &grid, &u).unwrap();
    let mid = grid.nearest(0.0);
    let exact = w * w / PI / (2.0 * w);
    assert!((vacuum_spectrum(&green, mid, &u) / exact - 1.0).abs() < 1e-4);
    let twice = vacuum_spectrum(&green, mid, &u.with_hbar(2.0));
    assert!((twice - 2.0 * vacuum_spectrum(&green, mid, &u)).abs() < 1e-15);
}

#[test]
fn vacuum_spectrum_is_scaled_fdt_diagonal() {
    let u = UnitsSystem::natural().with_hbar(0.5);
    let s = in_vacuum(electric());
    let grid = Grid1D::covering(&s, 0.02, 0.3).unwrap();
    let w = 0.8;
    let (bundle, green) = mode_fe(&s, w, &grid, &u).unwrap();
    let lhs = fdt_identity_check(&bundle, &green, ExteriorFlux::Lattice);
    for i in [0, grid.len() / 2, grid.len() - 1] {
        let diag = lhs[(i, i)].re + green.kernel[(i, i)].im;
        let expect = u.hbar * u.mu0 * w * w / PI * diag;
        assert!((vacuum_spectrum(&green, i, &u) - expect).abs() < 1e-10 * expect);
    }
}

fn spectrum_ratio(m: MaterialModel, w: f64) -> f64 {
    let u = UnitsSystem::natural();
    let s = LayerStack::slab(MaterialModel::vacuum(), m, 2.0).unwrap();
    let grid = Grid1D::covering(&s, 0.01, 0.5).unwrap();
    let green = maxqed::green1d::solve_green(&s, w, &grid, &u).unwrap();
    let mid = grid.nearest(1.0);
    let free = u.hbar * u.mu0 * w * w / PI * homogeneous_green(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), w, 0.0, 0.0, &u).unwrap().im;
    vacuum_spectrum(&green, mid, &u) / free
}

#[test]
fn magnetic_resonance_enhances_spectrum() {
    let sweep: Vec<(f64, f64)> = (0..21).map(|i| 0.5 + 0.05 * i as f64).map(|w| (w, spectrum_ratio(magnetic(), w))).collect();
    let near = sweep.iter().filter(|(w, _)| (w - 1.0).abs() <= 0.1).map(|p| p.1).fold(0.0, f64::max);
    assert!(near > 1.5, "{sweep:?}");
    let far = sweep.iter().find(|(w, _)| *w == 0.5).unwrap().1;
    assert!(near > far);
}

#[test]
fn electric_resonance_suppresses_then_enhances() {
    // a large |ε| at ω_T shortens the wavelength and lowers the transverse
    // local density; past the ε ≈ 0 point (ω² = ω_T² + ω_p²) it rises above vacuum
    assert!(spectrum_ratio(electric(), 1.0) < 0.5);
    assert!(spectrum_ratio(electric(), 1.6) > 1.2);
}

#[test]
fn random_loss_profiles_conserve_charge() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(3..60);
        let amps: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let k = charge_kernels(&amps, rng.random_range(0.01..10.0), rng.random_range(1e-3..1.0));
        assert!(charge_conservation_residual(&k) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn charge_conserved_for_any_stack(wp in 0.1f64..3.0, wt in 0.2f64..3.0, g in 0.01f64..1.0, w in 0.1f64..4.0) {
        let u = UnitsSystem::natural();
        let s = in_vacuum(MaterialModel::electric(&[(wp, wt, g)]).unwrap());
        let grid = Grid1D::covering(&s, 0.05, 0.2).unwrap();
        let op = maxqed::green1d::DiscreteOperator::assemble(&s, &grid, w, &u).unwrap();
        prop_assert!(charge_conservation_check(&op, &u) <= 1e-12);
    }

    #[test]
    fn mode_support_follows_losses(wp in 0.1f64..2.0, g in 0.01f64..0.5, w in 0.3f64..2.0) {
        let s = LayerStack::new(vec![
            maxqed::green1d::Layer { name: "l".into(), thickness: f64::INFINITY, material: MaterialModel::vacuum() },
            maxqed::green1d::Layer { name: "e".into(), thickness: 0.5, material: MaterialModel::electric(&[(wp, 1.0, g)]).unwrap() },
            maxqed::green1d::Layer { name: "gap".into(), thickness: 0.5, material: MaterialModel::vacuum() },
            maxqed::green1d::Layer { name: "m".into(), thickness: 0.5, material: MaterialModel::magnetic(&[(wp, 1.0, g)]).unwrap() },
            maxqed::green1d::Layer { name: "r".into(), thickness: f64::INFINITY, material: MaterialModel::vacuum() },
        ]).unwrap();
        let grid = Grid1D::covering(&s, 0.05, 0.2).unwrap();
        let (b, _) = mode_fe(&s, w, &grid, &UnitsSystem::natural()).unwrap();
        for i in 0..grid.len() {
            let z = grid.node(i);
            let col_zero = b.electric.column(i).iter().all(|v| *v == Complex64::new(0.0, 0.0));
            prop_assert_eq!(col_zero, !(z > 0.0 && z < 0.5), "node {} at {}", i, z);
        }
        for c in 0..grid.cells() {
            let z = grid.cell_center(c);
            let col_zero = b.magnetic.column(c).iter().all(|v| *v == Complex64::new(0.0, 0.0));
            // interfaces sit on cell centres, so straddling cells carry half the loss
            prop_assert_eq!(col_zero, !(z > 1.0 - 1e-9 && z < 1.5 + 1e-9), "cell {} at {}", c, z);
        }
        prop_assert!(b.electric.iter().chain(b.magnetic.iter()).all(|v| v.is_finite()));
    }
}
