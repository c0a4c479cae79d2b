use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DiscreteOperator, Grid1D, GreenError, LayerStack};
use crate::units::UnitsSystem;

/// Closed-form Green function of a uniform medium,
/// `g = i e^{ik|z−z′|}/(2κk)` with `k = (ω/c)·sqrt(ε/κ)`, `Im k ≥ 0`.
pub fn homogeneous_green(
    epsilon: Complex64,
    kappa: Complex64,
    omega: f64,
    z: f64,
    z_prime: f64,
    units: &UnitsSystem,
) -> Result<Complex64, GreenError> {
    let k = medium_wavenumber(epsilon, kappa, omega, units)?;
    let i = Complex64::i();
    Ok(i * (i * k * (z - z_prime).abs()).exp() / (2.0 * kappa * k))
}

/// `k = (ω/c) sqrt(ε/κ)` on the retarded branch: `Im k ≥ 0`, and `Re k > 0`
/// when the medium is lossless.
pub fn medium_wavenumber(epsilon: Complex64, kappa: Complex64, omega: f64, units: &UnitsSystem) -> Result<Complex64, GreenError> {
    let mut k = (epsilon / kappa).sqrt() * units.k0(omega);
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        k = -k;
    }
    if k.norm() < 1e-12 * units.k0(omega).abs().max(f64::MIN_POSITIVE) || k.norm() == 0.0 {
        return Err(GreenError::BranchAmbiguity { k0: units.k0(omega), h: 0.0 });
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverInfo {
    /// `max |A·g·h − I|` over all solved columns.
    pub residual_norm: f64,
    /// `|ρ|` of the left and right outgoing lattice waves.
    pub boundary_decay: (f64, f64),
    pub columns_solved: usize,
}

/// Discretized `g(z_i, z_j, ω)` at one frequency.
#[derive(Debug, Clone)]
pub struct GreenSolution {
    pub omega: f64,
    pub operator: DiscreteOperator,
    pub kernel: DMatrix<Complex64>,
    pub info: SolverInfo,
}

impl GreenSolution {
    pub fn grid(&self) -> &Grid1D {
        &self.operator.grid
    }

    pub fn residual_norm(&self) -> f64 {
        self.info.residual_norm
    }

    pub fn max_abs(&self) -> f64 {
        self.kernel.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |g_ij − g_ji| / max |g|`.
    pub fn reciprocity_error(&self) -> f64 {
        let n = self.kernel.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.kernel[(i, j)] - self.kernel[(j, i)]).norm());
            }
        }
        worst / self.max_abs()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.kernel.column(j).iter().copied().collect()
    }
}

/// Full kernel: every column solves `A g_j = e_j / h`.
pub fn solve_green(stack: &LayerStack, omega: f64, grid: &Grid1D, units: &UnitsSystem) -> Result<GreenSolution, GreenError> {
    let op = DiscreteOperator::assemble(stack, grid, omega, units)?;
    solve_operator(op)
}

/// Full kernel of an already assembled operator.
pub fn solve_operator(op: DiscreteOperator) -> Result<GreenSolution, GreenError> {
    let n = op.len();
    let h = op.grid.h();
    let lu = op.factor()?;
    let mut kernel = DMatrix::<Complex64>::zeros(n, n);
    let mut residual: f64 = 0.0;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        rhs.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        rhs[j] = Complex64::new(1.0 / h, 0.0);
        lu.solve_in_place(&mut rhs);
        residual = residual.max(column_residual(&op, &rhs, j));
        kernel.column_mut(j).iter_mut().zip(&rhs).for_each(|(k, v)| *k = *v);
    }
    log::debug!("solved {n}×{n} Green kernel at ω={}, residual {residual:e}", op.omega);
    Ok(GreenSolution {
        omega: op.omega,
        info: SolverInfo {
            residual_norm: residual,
            boundary_decay: (op.left.rho.norm(), op.right.rho.norm()),
            columns_solved: n,
        },
        operator: op,
        kernel,
    })
}

/// Single column `g(·, z_j)`, for grids too large for the full kernel.
/// Returns the column and its residual.
pub fn solve_green_column(op: &DiscreteOperator, j: usize) -> Result<(Vec<Complex64>, f64), GreenError> {
    let n = op.len();
    if j >= n {
        return Err(GreenError::GridMismatch { expected: n, got: j + 1 });
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[j] = Complex64::new(1.0 / op.grid.h(), 0.0);
    op.factor()?.solve_in_place(&mut rhs);
    let r = column_residual(op, &rhs, j);
    Ok((rhs, r))
}

fn column_residual(op: &DiscreteOperator, g: &[Complex64], j: usize) -> f64 {
    let h = op.grid.h();
    op.apply(g)
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (v * h - target).norm()
        })
        .fold(0.0, f64::max)
}
