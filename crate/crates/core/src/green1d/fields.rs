use num_complex::Complex64;

use super::{DiscreteOperator, Grid1D, GreenError, GreenSolution};
use crate::units::UnitsSystem;

/// `E(z_i) = μ0 Σ_j iω g_ij j_j h`.
pub fn field_from_current(sol: &GreenSolution, current: &[Complex64], units: &UnitsSystem) -> Result<Vec<Complex64>, GreenError> {
    let n = sol.kernel.nrows();
    if current.len() != n {
        return Err(GreenError::GridMismatch {
            expected: n,
            got: current.len(),
        });
    }
    let pre = Complex64::new(0.0, units.mu0 * sol.omega * sol.grid().h());
    Ok((0..n)
        .map(|i| pre * (0..n).map(|j| sol.kernel[(i, j)] * current[j]).sum::<Complex64>())
        .collect())
}

/// `B = −(i/ω) ∂_z E`: central differences inside, second-order one-sided
/// differences at the two ends.
pub fn magnetic_from_electric(e: &[Complex64], omega: f64, grid: &Grid1D) -> Result<Vec<Complex64>, GreenError> {
    let n = grid.len();
    if e.len() != n {
        return Err(GreenError::GridMismatch { expected: n, got: e.len() });
    }
    let h = grid.h();
    let pre = -Complex64::i() / omega;
    Ok((0..n)
        .map(|i| {
            let d = if i == 0 {
                (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * e[n - 1] - 4.0 * e[n - 2] + e[n - 3]) / (2.0 * h)
            } else {
                (e[i + 1] - e[i - 1]) / (2.0 * h)
            };
            pre * d
        })
        .collect())
}

/// Splits a field sampled at two nodes of a uniform region into lattice
/// plane waves `P e^{ik_h(z−z_ref)} + Q e^{−ik_h(z−z_ref)}` and returns
/// `(P, Q)`. The lattice wavenumber makes the split exact for any solution
/// of the discrete equations in that region.
pub fn plane_wave_amplitudes(
    field: &[Complex64],
    grid: &Grid1D,
    lattice_k: Complex64,
    nodes: (usize, usize),
    z_ref: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let (z1, z2) = (grid.node(nodes.0) - z_ref, grid.node(nodes.1) - z_ref);
    let (a1, b1) = ((i * lattice_k * z1).exp(), (-i * lattice_k * z1).exp());
    let (a2, b2) = ((i * lattice_k * z2).exp(), (-i * lattice_k * z2).exp());
    let (f1, f2) = (field[nodes.0], field[nodes.1]);
    let det = a1 * b2 - a2 * b1;
    ((f1 * b2 - f2 * b1) / det, (a1 * f2 - a2 * f1) / det)
}

/// Reflection coefficient of the stack seen from the left, read off the
/// solved field of a source placed in the left half-space. `nodes` must lie
/// between the source and the first interface.
pub fn reflection_from_column(op: &DiscreteOperator, column: &[Complex64], nodes: (usize, usize), z_interface: f64) -> Complex64 {
    let k = op.left.lattice_wavenumber(op.grid.h());
    let (p, q) = plane_wave_amplitudes(column, &op.grid, k, nodes, z_interface);
    q / p
}
