use num_complex::Complex64;

use super::{Grid1D, GreenError, LayerStack, TridiagLu};
use crate::units::UnitsSystem;

/// One outer half-space as seen by the lattice: uniform coefficients and the
/// ratio `ρ = g_{n∓1}/g_n` of the outgoing lattice wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exterior {
    pub epsilon: Complex64,
    pub kappa: Complex64,
    pub rho: Complex64,
    /// `1 − ρ`, kept separately because it is small when `kh` is.
    pub one_minus_rho: Complex64,
}

impl Exterior {
    pub fn new(epsilon: Complex64, kappa: Complex64, k0: f64, h: f64) -> Result<Self, GreenError> {
        // ρ + 1/ρ = 2 − q with q = h² k0² ε/κ; the root with |ρ| < 1 decays
        // away from the domain, and on the unit circle Im ρ > 0 is outgoing.
        let q = epsilon / kappa * (h * h * k0 * k0);
        let s = (q * q / 4.0 - q).sqrt();
        if s.norm() < 1e-14 || (Complex64::new(4.0, 0.0) - q).norm() < 1e-10 {
            return Err(GreenError::BranchAmbiguity { k0, h });
        }
        let c = Complex64::new(1.0, 0.0) - q / 2.0;
        let (r1, r2) = (c + s, c - s);
        let (m1, m2) = (r1.norm(), r2.norm());
        let take_first = if (m1 - m2).abs() > 1e-13 * (m1 + m2) {
            m1 < m2
        } else {
            r1.im > 0.0
        };
        let (rho, one_minus_rho) = if take_first { (r1, q / 2.0 - s) } else { (r2, q / 2.0 + s) };
        Ok(Self {
            epsilon,
            kappa,
            rho,
            one_minus_rho,
        })
    }

    /// Lattice wavenumber `k_h` with `ρ = e^{i k_h h}`.
    pub fn lattice_wavenumber(&self, h: f64) -> Complex64 {
        -Complex64::i() * self.rho.ln() / h
    }
}

/// The discretized wave operator `A = Dᵀ K D − k0² E` with exact lattice
/// outgoing rows at both ends. `ε` lives on nodes (dual-cell means), `κ`
/// on cells (harmonic means). The matrix is complex symmetric.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub omega: f64,
    pub k0: f64,
    pub eps_nodes: Vec<Complex64>,
    pub kappa_cells: Vec<Complex64>,
    pub left: Exterior,
    pub right: Exterior,
    diag: Vec<Complex64>,
    off: Vec<Complex64>,
}

impl DiscreteOperator {
    pub fn assemble(stack: &LayerStack, grid: &Grid1D, omega: f64, units: &UnitsSystem) -> Result<Self, GreenError> {
        if !(omega > 0.0) {
            return Err(GreenError::NonPositiveFrequency(omega));
        }
        grid.check_covers(stack)?;
        let h = grid.h();
        let k0 = units.k0(omega);
        let eps_nodes: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let z = grid.node(i);
                stack.mean_epsilon(z - 0.5 * h, z + 0.5 * h, omega)
            })
            .collect();
        let kappa_cells = (0..grid.cells())
            .map(|c| stack.harmonic_kappa(grid.node(c), grid.node(c + 1), omega))
            .collect::<Result<Vec<_>, _>>()?;
        let left = Exterior::new(stack.left().epsilon(omega), stack.left().kappa(omega)?, k0, h)?;
        let right = Exterior::new(stack.right().epsilon(omega), stack.right().kappa(omega)?, k0, h)?;
        Ok(Self::from_parts(*grid, omega, k0, eps_nodes, kappa_cells, left, right))
    }

    pub fn from_parts(
        grid: Grid1D,
        omega: f64,
        k0: f64,
        eps_nodes: Vec<Complex64>,
        kappa_cells: Vec<Complex64>,
        left: Exterior,
        right: Exterior,
    ) -> Self {
        let n = grid.len();
        let h2 = grid.h() * grid.h();
        let k02 = k0 * k0;
        let mut diag = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let kl = if i == 0 { left.kappa * left.one_minus_rho } else { kappa_cells[i - 1] };
            let kr = if i == n - 1 { right.kappa * right.one_minus_rho } else { kappa_cells[i] };
            diag[i] = (kl + kr) / h2 - eps_nodes[i] * k02;
        }
        let off = kappa_cells.iter().map(|k| -k / h2).collect();
        Self {
            grid,
            omega,
            k0,
            eps_nodes,
            kappa_cells,
            left,
            right,
            diag,
            off,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diagonal(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[Complex64] {
        &self.off
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn factor(&self) -> Result<TridiagLu, GreenError> {
        TridiagLu::factor(&self.off, &self.diag, &self.off).map_err(|row| GreenError::SingularOperator { row })
    }

    /// Forward difference `(x_{c+1} − x_c)/h` on cells.
    pub fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let h = self.grid.h();
        x.windows(2).map(|p| (p[1] - p[0]) / h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_exterior_is_unit_phase() {
        let e = Exterior::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 1.0, 0.01).unwrap();
        assert!((e.rho.norm() - 1.0).abs() < 1e-14);
        assert!(e.rho.im > 0.0);
        assert!((e.rho + e.one_minus_rho - 1.0).norm() < 1e-15);
        // cos(k_h h) = 1 − h²k²/2
        let kh = e.lattice_wavenumber(0.01);
        assert!(((kh.re * 0.01).cos() - (1.0 - 0.5e-4)).abs() < 1e-15);
    }

    #[test]
    fn lossy_exterior_decays() {
        let e = Exterior::new(Complex64::new(2.0, 0.5), Complex64::new(1.0, 0.0), 1.0, 0.05).unwrap();
        assert!(e.rho.norm() < 1.0);
        let k = Complex64::new(2.0, 0.5).sqrt();
        assert!((e.lattice_wavenumber(0.05) - k).norm() < 1e-3);
    }

    #[test]
    fn static_limit_is_ambiguous() {
        assert!(matches!(
            Exterior::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0, 0.1),
            Err(GreenError::BranchAmbiguity { .. })
        ));
    }
}
