//! Mode kernels of the diagonalized field, noise-current kernels and the
//! identities that tie them to the Green function.
//!
//! Electric sources live on nodes (where `ε` lives), magnetic sources on
//! cells (where `κ` lives). The discrete commutator `[C_i, C_j†]` is
//! `δ_ij / h`, so kernels carry a `1/h` wherever the continuum carries a
//! delta function. Spectral densities use the one-sided convention with the
//! field written as `(1/2π)∫_0^∞ dω [… e^{−iωt} + h.c.]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::green1d::{solve_operator, DiscreteOperator, Exterior, Grid1D, GreenError, GreenSolution, LayerStack};
use crate::units::UnitsSystem;

/// Electric (`e`) and magnetic (`m`) mode families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Electric,
    Magnetic,
}

/// Loss amplitudes `sqrt(ħε0ε_I/π)` on nodes and `sqrt(−ħκ0κ_I/π)` on cells,
/// taken from the same averaged coefficients as the wave operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LossAmplitudes {
    pub electric: Vec<f64>,
    pub magnetic: Vec<f64>,
}

impl LossAmplitudes {
    pub fn from_operator(op: &DiscreteOperator, units: &UnitsSystem) -> Self {
        let electric = op
            .eps_nodes
            .iter()
            .map(|e| (units.hbar * units.eps0 * e.im.max(0.0) / PI).sqrt())
            .collect();
        let magnetic = op
            .kappa_cells
            .iter()
            .map(|k| (-units.hbar * units.kappa0() * k.im.min(0.0) / PI).sqrt())
            .collect();
        Self { electric, magnetic }
    }
}

/// Source kernels `s_e` (nodes × nodes, diagonal) and `s_m` (nodes × cells).
#[derive(Debug, Clone)]
pub struct SourceKernels {
    pub omega: f64,
    pub electric: DMatrix<Complex64>,
    pub magnetic: DMatrix<Complex64>,
}

/// `s_e = ω² sqrt(ħε0ε_I/π) δ/h` and `s_m = iω ∂_z[sqrt(−ħκ0κ_I/π) δ/h]`,
/// with the node-valued derivative of a cell function being `−Dᵀ`.
pub fn source_kernels(op: &DiscreteOperator, units: &UnitsSystem) -> SourceKernels {
    let amp = LossAmplitudes::from_operator(op, units);
    let n = op.len();
    let h = op.grid.h();
    let w = op.omega;
    let mut electric = DMatrix::zeros(n, n);
    for (i, a) in amp.electric.iter().enumerate() {
        electric[(i, i)] = Complex64::new(w * w * a / h, 0.0);
    }
    let mut magnetic = DMatrix::zeros(n, n - 1);
    let pre = Complex64::new(0.0, w) / (h * h);
    for (c, b) in amp.magnetic.iter().enumerate() {
        // (−Dᵀ)_{c,c} = 1/h, (−Dᵀ)_{c+1,c} = −1/h
        magnetic[(c, c)] = pre * *b;
        magnetic[(c + 1, c)] = -pre * *b;
    }
    SourceKernels { omega: w, electric, magnetic }
}

/// Mode kernels `f_E^λ = μ0 g s_λ h` at one frequency.
#[derive(Debug, Clone)]
pub struct ModeBundle {
    pub omega: f64,
    pub grid: Grid1D,
    pub units: UnitsSystem,
    pub electric: DMatrix<Complex64>,
    pub magnetic: DMatrix<Complex64>,
    pub sources: SourceKernels,
    /// `sqrt(ħ/2ω)`, the weight of the delta in the reservoir coefficients.
    pub normalization: f64,
}

impl ModeBundle {
    pub fn kernel(&self, pol: Polarization) -> &DMatrix<Complex64> {
        match pol {
            Polarization::Electric => &self.electric,
            Polarization::Magnetic => &self.magnetic,
        }
    }
}

/// Solves for the Green kernel and assembles both mode families.
pub fn mode_fe(stack: &LayerStack, omega: f64, grid: &Grid1D, units: &UnitsSystem) -> Result<(ModeBundle, GreenSolution), GreenError> {
    let op = DiscreteOperator::assemble(stack, grid, omega, units)?;
    let green = solve_operator(op)?;
    Ok((mode_fe_from_green(&green, units), green))
}

pub fn mode_fe_from_green(green: &GreenSolution, units: &UnitsSystem) -> ModeBundle {
    let sources = source_kernels(&green.operator, units);
    let scale = units.mu0 * green.grid().h();
    let n = green.kernel.nrows();
    // s_e is diagonal and s_m bidiagonal, so the products reduce to column operations
    let mut electric = green.kernel.clone();
    for j in 0..n {
        let f = sources.electric[(j, j)] * scale;
        for v in electric.column_mut(j).iter_mut() {
            *v *= f;
        }
    }
    let mut magnetic = DMatrix::zeros(n, n - 1);
    for c in 0..n - 1 {
        let (up, down) = (sources.magnetic[(c, c)] * scale, sources.magnetic[(c + 1, c)] * scale);
        for i in 0..n {
            magnetic[(i, c)] = green.kernel[(i, c)] * up + green.kernel[(i, c + 1)] * down;
        }
    }
    ModeBundle {
        omega: green.omega,
        grid: *green.grid(),
        units: *units,
        electric,
        magnetic,
        sources,
        normalization: (units.hbar / (2.0 * green.omega)).sqrt(),
    }
}

/// Largest entry of `A f_E^λ − μ0 s_λ` over both families, relative to the
/// largest entry of `μ0 s_λ`.
pub fn mode_equation_residual(bundle: &ModeBundle, op: &DiscreteOperator) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (f, s) in [
        (&bundle.electric, &bundle.sources.electric),
        (&bundle.magnetic, &bundle.sources.magnetic),
    ] {
        for c in 0..f.ncols() {
            let col: Vec<Complex64> = f.column(c).iter().copied().collect();
            let af = op.apply(&col);
            for (r, v) in af.iter().enumerate() {
                let target = s[(r, c)] * bundle.units.mu0;
                worst = worst.max((v - target).norm());
                scale = scale.max(target.norm());
            }
        }
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Assembled `Σ_k h*_X h_X + h*_Y h_Y` (quadrature weight `h`) for the
/// delta-function reservoir coefficients, compared with `(ħ/2ω) δ_ij δ_λλ′ / h`.
/// Returns the largest deviation relative to `ħ/(2ωh)`.
pub fn hcon_residual(bundle: &ModeBundle) -> f64 {
    let n = bundle.grid.len();
    let cells = bundle.grid.cells();
    let h = bundle.grid.h();
    let amp = bundle.normalization / h;
    // columns: (λ, index); X coefficients live on nodes, Y coefficients on cells
    let total = n + cells;
    let mut hx = DMatrix::<f64>::zeros(n, total);
    let mut hy = DMatrix::<f64>::zeros(cells, total);
    for i in 0..n {
        hx[(i, i)] = amp;
    }
    for c in 0..cells {
        hy[(c, n + c)] = amp;
    }
    let gram = (hx.transpose() * &hx + hy.transpose() * &hy) * h;
    let target = bundle.normalization.powi(2) / h;
    let mut worst: f64 = 0.0;
    for r in 0..total {
        for c in 0..total {
            let expect = if r == c { target } else { 0.0 };
            worst = worst.max((gram[(r, c)] - expect).abs());
        }
    }
    worst / target
}

/// How the radiation leaving through the two outer half-spaces is
/// accounted for in the fluctuation–dissipation identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExteriorFlux {
    /// Continuum outgoing flux `Re(κk)|g|²` at the edge of each boundary
    /// node's dual cell. Leaves an `O(h²)` residual.
    #[default]
    Continuum,
    /// The lattice's own outgoing flux `Im(κ(ρ−1))/h`. Exact to rounding.
    Lattice,
    /// No exterior term; only correct when the outer media absorb everything.
    None,
}

fn exterior_weight(ext: &Exterior, flux: ExteriorFlux, k0: f64, h: f64) -> f64 {
    match flux {
        ExteriorFlux::Continuum => {
            let mut k = (ext.epsilon / ext.kappa).sqrt() * k0;
            if k.im < 0.0 {
                k = -k;
            }
            if k.im == 0.0 && k.re < 0.0 {
                k = -k;
            }
            (ext.kappa * k).re * (-k.im * h).exp()
        }
        ExteriorFlux::Lattice => (-(ext.kappa * ext.one_minus_rho)).im / h,
        ExteriorFlux::None => 0.0,
    }
}

/// Fluctuation–dissipation check assembled from the mode kernels:
/// `(π/ħμ0ω²) Σ_λ f_E^λ f_E^λ† h + exterior flux − Im g`.
pub fn fdt_identity_check(bundle: &ModeBundle, green: &GreenSolution, flux: ExteriorFlux) -> DMatrix<Complex64> {
    let u = &bundle.units;
    let h = bundle.grid.h();
    let pre = PI / (u.hbar * u.mu0 * bundle.omega * bundle.omega) * h;
    let lhs = (&bundle.electric * bundle.electric.adjoint() + &bundle.magnetic * bundle.magnetic.adjoint())
        * Complex64::new(pre, 0.0);
    finish_fdt(lhs, green, flux)
}

/// The same left-hand side computed straight from the Green kernel:
/// `k0² Σ_k ε_I g_ik ḡ_jk h + Σ_c (−κ_I) ∂g_ic ∂ḡ_jc h + exterior flux`.
pub fn fdt_identity_direct(green: &GreenSolution, flux: ExteriorFlux) -> DMatrix<Complex64> {
    let op = &green.operator;
    let n = op.len();
    let h = op.grid.h();
    let g = &green.kernel;
    let mut weighted = g.clone();
    for k in 0..n {
        let w = op.k0 * op.k0 * op.eps_nodes[k].im * h;
        weighted.column_mut(k).scale_mut(w);
    }
    let mut lhs = &weighted * g.adjoint();
    let mut dg = DMatrix::<Complex64>::zeros(n, n - 1);
    for c in 0..n - 1 {
        for i in 0..n {
            dg[(i, c)] = (g[(i, c + 1)] - g[(i, c)]) / h;
        }
    }
    let mut dgw = dg.clone();
    for c in 0..n - 1 {
        dgw.column_mut(c).scale_mut(-op.kappa_cells[c].im * h);
    }
    lhs += &dgw * dg.adjoint();
    finish_fdt(lhs, green, flux)
}

fn finish_fdt(mut lhs: DMatrix<Complex64>, green: &GreenSolution, flux: ExteriorFlux) -> DMatrix<Complex64> {
    let op = &green.operator;
    let n = op.len();
    let h = op.grid.h();
    let g = &green.kernel;
    let wl = exterior_weight(&op.left, flux, op.k0, h);
    let wr = exterior_weight(&op.right, flux, op.k0, h);
    for i in 0..n {
        for j in 0..n {
            let ext = g[(i, 0)] * g[(j, 0)].conj() * wl + g[(i, n - 1)] * g[(j, n - 1)].conj() * wr;
            lhs[(i, j)] += ext;
            // (g − g†)/2i, which is Im g entrywise for a symmetric kernel
            let im_g = (g[(i, j)] - g[(j, i)].conj()) / Complex64::new(0.0, 2.0);
            lhs[(i, j)] -= im_g;
        }
    }
    lhs
}

/// `max |residual| / max |Im g|`.
pub fn fdt_relative_residual(residual: &DMatrix<Complex64>, green: &GreenSolution) -> f64 {
    let worst = residual.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = green.kernel.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    worst / scale
}

/// Electric and magnetic parts of the noise-current commutator kernel
/// `[j_i, j_j†]` (the common `δ(ω−ω′)` stripped).
#[derive(Debug, Clone)]
pub struct NoiseKernel {
    pub omega: f64,
    pub electric: DMatrix<Complex64>,
    pub magnetic: DMatrix<Complex64>,
}

impl NoiseKernel {
    pub fn total(&self) -> DMatrix<Complex64> {
        &self.electric + &self.magnetic
    }
}

/// Electric part `4πħω²ε0ε_I δ_ij / h`; magnetic part
/// `4πħκ0 Dᵀ diag(−κ_I) D / h`, the discrete curl sandwich.
pub fn noise_kernel(op: &DiscreteOperator, units: &UnitsSystem) -> NoiseKernel {
    let n = op.len();
    let h = op.grid.h();
    let w = op.omega;
    let mut electric = DMatrix::zeros(n, n);
    for i in 0..n {
        let v = 4.0 * PI * units.hbar * w * w * units.eps0 * op.eps_nodes[i].im.max(0.0) / h;
        electric[(i, i)] = Complex64::new(v, 0.0);
    }
    let mut magnetic = DMatrix::zeros(n, n);
    for c in 0..n - 1 {
        let v = 4.0 * PI * units.hbar * units.kappa0() * (-op.kappa_cells[c].im).max(0.0) / (h * h * h);
        magnetic[(c, c)] += v;
        magnetic[(c + 1, c + 1)] += v;
        magnetic[(c, c + 1)] -= v;
        magnetic[(c + 1, c)] -= v;
    }
    NoiseKernel {
        omega: w,
        electric,
        magnetic,
    }
}

/// The noise kernel rebuilt from the source kernels,
/// `(2π/ω)² Σ_λ s_λ s_λ† h`; agrees with [`noise_kernel`] by construction of
/// the current `ĵ = (−2πi/ω) Σ_λ s_λ C_λ`.
pub fn noise_kernel_from_sources(src: &SourceKernels, h: f64) -> DMatrix<Complex64> {
    let pre = (2.0 * PI / src.omega).powi(2) * h;
    (&src.electric * src.electric.adjoint() + &src.magnetic * src.magnetic.adjoint()) * Complex64::new(pre, 0.0)
}

/// Equal-point vacuum spectral density `(ħμ0ω²/π) Im g(z, z)` at node `i`.
pub fn vacuum_spectrum(green: &GreenSolution, node: usize, units: &UnitsSystem) -> f64 {
    units.hbar * units.mu0 * green.omega * green.omega / PI * green.kernel[(node, node)].im
}

/// Longitudinal charge and current kernels of the electric noise current:
/// `ĵ_z = −2πiω sqrt(ħε0ε_I/π) C` on nodes and
/// `σ̂ = −2π D[sqrt(ħε0ε_I/π) C]` on cells.
#[derive(Debug, Clone)]
pub struct ChargeKernels {
    pub omega: f64,
    pub h: f64,
    pub current: DMatrix<Complex64>,
    pub charge: DMatrix<Complex64>,
}

pub fn charge_kernels(amplitudes: &[f64], omega: f64, h: f64) -> ChargeKernels {
    let n = amplitudes.len();
    let mut current = DMatrix::zeros(n, n);
    for (i, a) in amplitudes.iter().enumerate() {
        current[(i, i)] = Complex64::new(0.0, -2.0 * PI * omega * a);
    }
    let mut charge = DMatrix::zeros(n - 1, n);
    for c in 0..n - 1 {
        charge[(c, c)] = Complex64::new(2.0 * PI * amplitudes[c] / h, 0.0);
        charge[(c, c + 1)] = Complex64::new(-2.0 * PI * amplitudes[c + 1] / h, 0.0);
    }
    ChargeKernels {
        omega,
        h,
        current,
        charge,
    }
}

/// Charge conservation of the electric noise current generated by the
/// losses of `op`.
pub fn charge_conservation_check(op: &DiscreteOperator, units: &UnitsSystem) -> f64 {
    let amp = LossAmplitudes::from_operator(op, units);
    charge_conservation_residual(&charge_kernels(&amp.electric, op.omega, op.grid.h()))
}

/// `max |−iω σ̂ + D ĵ|` relative to `max |D ĵ|` (zero when there is no current).
pub fn charge_conservation_residual(k: &ChargeKernels) -> f64 {
    let n = k.current.nrows();
    let mut div = DMatrix::<Complex64>::zeros(n - 1, k.current.ncols());
    for c in 0..n - 1 {
        for col in 0..k.current.ncols() {
            div[(c, col)] = (k.current[(c + 1, col)] - k.current[(c, col)]) / k.h;
        }
    }
    let res = &k.charge * Complex64::new(0.0, -k.omega) + &div;
    let worst = res.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = div.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialModel;

    fn lossy_slab() -> LayerStack {
        LayerStack::slab(MaterialModel::vacuum(), MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn vacuum_has_no_sources() {
        let s = LayerStack::homogeneous(MaterialModel::vacuum());
        let g = Grid1D::spanning(-1.0, 1.0, 0.05).unwrap();
        let (b, _) = mode_fe(&s, 1.0, &g, &UnitsSystem::natural()).unwrap();
        assert!(b.electric.iter().all(|v| v.norm() == 0.0));
        assert!(b.magnetic.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn nonmagnetic_stack_has_no_magnetic_source() {
        let g = Grid1D::covering(&lossy_slab(), 0.05, 0.5).unwrap();
        let op = DiscreteOperator::assemble(&lossy_slab(), &g, 1.0, &UnitsSystem::natural()).unwrap();
        let s = source_kernels(&op, &UnitsSystem::natural());
        assert!(s.magnetic.iter().all(|v| v.norm() == 0.0));
        // columns generated only by slab nodes
        for i in 0..g.len() {
            let inside = g.node(i) > 0.0 && g.node(i) < 1.0;
            assert_eq!(s.electric[(i, i)].norm() > 1e-6, inside, "node {i} at {}", g.node(i));
        }
    }

    #[test]
    fn hbar_scaling_of_sources() {
        let g = Grid1D::covering(&lossy_slab(), 0.05, 0.5).unwrap();
        let op = DiscreteOperator::assemble(&lossy_slab(), &g, 1.0, &UnitsSystem::natural()).unwrap();
        let a = source_kernels(&op, &UnitsSystem::natural());
        let b = source_kernels(&op, &UnitsSystem::natural().with_hbar(4.0));
        assert!((&b.electric - &a.electric * Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn single_node_noise_entry() {
        // ε_I = 10 at ω = 1, h = 0.1: 4π·10/0.1 = 400π
        let m = MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap();
        let s = LayerStack::homogeneous(m);
        let g = Grid1D::spanning(-0.1, 0.1, 0.1).unwrap();
        let op = DiscreteOperator::assemble(&s, &g, 1.0, &UnitsSystem::natural()).unwrap();
        let k = noise_kernel(&op, &UnitsSystem::natural());
        assert!((k.electric[(1, 1)].re - 400.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn charge_residual_vanishes() {
        let k = charge_kernels(&[0.0, 0.3, 1.2, 0.7, 0.0], 1.3, 0.1);
        assert!(charge_conservation_residual(&k) < 1e-14);
        let zero = charge_kernels(&[0.0; 4], 1.0, 0.1);
        assert_eq!(charge_conservation_residual(&zero), 0.0);
    }

    #[test]
    fn hcon_is_exact() {
        let g = Grid1D::covering(&lossy_slab(), 0.1, 0.3).unwrap();
        let (b, _) = mode_fe(&lossy_slab(), 1.0, &g, &UnitsSystem::natural()).unwrap();
        assert!(hcon_residual(&b) < 1e-15);
    }
}
