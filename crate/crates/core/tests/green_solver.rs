use maxqed::green1d::transfer::{interface_reflection, scattering};
use maxqed::green1d::*;
use maxqed::materials::{LorentzPole, MaterialModel};
use maxqed::UnitsSystem;
use num_complex::Complex64;
use proptest::prelude::*;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn magnetodielectric() -> MaterialModel {
    MaterialModel::new(
        vec![LorentzPole::new(1.0, 1.0, 0.1).unwrap()],
        vec![LorentzPole::new(0.5, 2.0, 0.2).unwrap()],
    )
    .unwrap()
}

fn vacuum_error(h: f64) -> f64 {
    let u = UnitsSystem::natural();
    let g = Grid1D::spanning(-5.0, 5.0, h).unwrap();
    let sol = solve_green(&LayerStack::homogeneous(MaterialModel::vacuum()), 1.0, &g, &u).unwrap();
    let mut e: f64 = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            let exact = homogeneous_green(one(), one(), 1.0, g.node(i), g.node(j), &u).unwrap();
            e = e.max((sol.kernel[(i, j)] - exact).norm());
        }
    }
    e
}

#[test]
fn vacuum_converges_at_second_order() {
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| vacuum_error(h)).collect();
    for w in errs.windows(2) {
        let p = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&p), "{errs:?}");
    }
}

#[test]
fn half_space_reflection_matches_transfer_matrix() {
    let u = UnitsSystem::natural();
    let m = magnetodielectric();
    let stack = LayerStack::interface(MaterialModel::vacuum(), m.clone());
    let w = 0.8;
    let exact = interface_reflection((one(), one()), (m.epsilon(w), m.kappa(w).unwrap()), w, &u).unwrap();
    let grid = Grid1D::covering(&stack, 2e-4, 3.0).unwrap();
    let op = DiscreteOperator::assemble(&stack, &grid, w, &u).unwrap();
    let (col, res) = solve_green_column(&op, grid.nearest(-2.0)).unwrap();
    assert!(res < 1e-8);
    let r = reflection_from_column(&op, &col, (grid.nearest(-1.0), grid.nearest(-0.5)), 0.0);
    assert!((r - exact).norm() <= 1e-8, "{r} vs {exact}: {:e}", (r - exact).norm());
}

#[test]
fn slab_reflection_and_transmission_match_transfer_matrix() {
    let u = UnitsSystem::natural();
    let stack = LayerStack::slab(MaterialModel::vacuum(), magnetodielectric(), 0.7).unwrap();
    let w = 1.2;
    let sc = scattering(&stack, w, &u).unwrap();
    let grid = Grid1D::covering(&stack, 1e-3, 2.0).unwrap();
    let op = DiscreteOperator::assemble(&stack, &grid, w, &u).unwrap();
    let src = grid.nearest(-1.5);
    let (col, _) = solve_green_column(&op, src).unwrap();
    let r = reflection_from_column(&op, &col, (grid.nearest(-1.0), grid.nearest(-0.5)), 0.0);
    assert!((r - sc.r).norm() < 1e-5, "{r} {}", sc.r);
    // transmitted field right of the slab against the incident amplitude at z = 0
    let kh = op.right.lattice_wavenumber(grid.h());
    let (p_in, _) = plane_wave_amplitudes(&col, &grid, op.left.lattice_wavenumber(grid.h()), (grid.nearest(-1.0), grid.nearest(-0.5)), 0.0);
    let (p_out, q_out) = plane_wave_amplitudes(&col, &grid, kh, (grid.nearest(1.0), grid.nearest(1.5)), 0.7);
    assert!(q_out.norm() < 1e-10 * p_out.norm());
    assert!((p_out / p_in - sc.t).norm() < 1e-5, "{} {}", p_out / p_in, sc.t);
}

#[test]
fn mirror_currents_give_antisymmetric_field() {
    let u = UnitsSystem::natural();
    let stack = LayerStack::slab(MaterialModel::vacuum(), magnetodielectric(), 1.0).unwrap();
    let grid = Grid1D::covering(&stack, 0.01, 1.0).unwrap();
    let sol = solve_green(&stack, 1.1, &grid, &u).unwrap();
    let n = grid.len();
    // the grid is symmetric about the slab midplane
    assert!((grid.node(0) + grid.node(n - 1) - 1.0).abs() < 1e-12);
    let mut j = vec![Complex64::new(0.0, 0.0); n];
    j[20] = Complex64::new(1.0, 0.0);
    j[n - 21] = Complex64::new(-1.0, 0.0);
    let e = field_from_current(&sol, &j, &u).unwrap();
    let scale = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..n {
        assert!((e[i] + e[n - 1 - i]).norm() < 1e-12 * scale);
    }
}

#[test]
fn closed_static_operator_is_singular() {
    // sealed ends with k0 = 0 leave the constant vector in the null space
    let closed = Exterior {
        epsilon: one(),
        kappa: one(),
        rho: one(),
        one_minus_rho: Complex64::new(0.0, 0.0),
    };
    let grid = Grid1D::new(0.0, 1.0, 3).unwrap();
    let op = DiscreteOperator::from_parts(grid, 1.0, 0.0, vec![one(); 3], vec![one(); 2], closed, closed);
    assert!(matches!(solve_operator(op), Err(GreenError::SingularOperator { .. })));
}

fn pole() -> impl Strategy<Value = LorentzPole> {
    (0.1..2.0f64, 0.3..3.0f64, 0.05..1.0f64).prop_map(|(p, r, g)| LorentzPole::new(p, r, g).unwrap())
}

fn lossy_stack() -> impl Strategy<Value = LayerStack> {
    (
        prop::collection::vec((0.2..1.5f64, prop::collection::vec(pole(), 0..2), prop::collection::vec(pole(), 0..2)), 1..4),
    )
        .prop_map(|(layers,)| {
            let mut v = vec![Layer { name: "l".into(), thickness: f64::INFINITY, material: MaterialModel::vacuum() }];
            for (d, e, m) in layers {
                v.push(Layer { name: "x".into(), thickness: d, material: MaterialModel::new(e, m).unwrap() });
            }
            v.push(Layer { name: "r".into(), thickness: f64::INFINITY, material: MaterialModel::vacuum() });
            LayerStack::new(v).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reciprocity_residual_and_passivity(stack in lossy_stack(), w in 0.2..2.5f64) {
        let u = UnitsSystem::natural();
        let grid = Grid1D::covering(&stack, 0.02, 0.5).unwrap();
        let sol = solve_green(&stack, w, &grid, &u).unwrap();
        prop_assert!(sol.reciprocity_error() <= 1e-10);
        prop_assert!(sol.residual_norm() <= 1e-8);
        for i in 0..grid.len() {
            prop_assert!(sol.kernel[(i, i)].im > 0.0);
        }
    }
}
