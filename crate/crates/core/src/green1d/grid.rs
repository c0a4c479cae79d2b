use super::{GreenError, LayerStack};
use crate::units::UnitsSystem;

/// Uniform nodes `z_i = start + i·h`, `i = 0..n`. Cell `c` is `[z_c, z_{c+1}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    start: f64,
    h: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(start: f64, h: f64, n: usize) -> Result<Self, GreenError> {
        if !(h > 0.0) || n < 3 || !start.is_finite() {
            return Err(GreenError::InvalidGrid(format!("start={start}, h={h}, n={n}")));
        }
        Ok(Self { start, h, n })
    }

    /// Nodes on `[a, b]` with spacing as close to `h` as fits an integer count.
    pub fn spanning(a: f64, b: f64, h: f64) -> Result<Self, GreenError> {
        let cells = ((b - a) / h).round().max(2.0) as usize;
        Self::new(a, (b - a) / cells as f64, cells + 1)
    }

    /// Covers the finite layers plus at least `margin` of each half-space,
    /// placed so the first interface falls on a cell midpoint.
    pub fn covering(stack: &LayerStack, h: f64, margin: f64) -> Result<Self, GreenError> {
        let (lo, hi) = stack.extent();
        let pad = (margin / h).ceil().max(1.0);
        let start = lo - (pad + 0.5) * h;
        let n = (((hi + margin - start) / h).ceil() as usize).max(2) + 1;
        Self::new(start, h, n)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> usize {
        self.n - 1
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn cell_center(&self, c: usize) -> f64 {
        self.start + (c as f64 + 0.5) * self.h
    }

    /// Nearest node to `z`, clamped to the grid.
    pub fn nearest(&self, z: f64) -> usize {
        (((z - self.start) / self.h).round().max(0.0) as usize).min(self.n - 1)
    }

    /// Boundary nodes must sit with their dual cells inside the outer half-spaces.
    pub fn check_covers(&self, stack: &LayerStack) -> Result<(), GreenError> {
        let (lo, hi) = stack.extent();
        if self.start + 0.5 * self.h > lo || self.end() - 0.5 * self.h < hi {
            return Err(GreenError::GridDoesNotCoverStack {
                start: self.start,
                end: self.end(),
                first: lo,
                last: hi,
            });
        }
        Ok(())
    }

    /// Smallest number of nodes per local wavelength over all layers at `ω`.
    pub fn nodes_per_wavelength(&self, stack: &LayerStack, omega: f64, units: &UnitsSystem) -> Result<f64, GreenError> {
        let mut worst = f64::INFINITY;
        for layer in stack.layers() {
            let eps = layer.material.epsilon(omega);
            let kappa = layer.material.kappa(omega)?;
            let k = units.k0(omega) * (eps / kappa).sqrt().norm();
            if k > 0.0 {
                worst = worst.min(2.0 * std::f64::consts::PI / (k * self.h));
            }
        }
        Ok(worst)
    }

    /// Fails with [`GreenError::UnderResolved`] below `min_nodes` per wavelength.
    pub fn check_resolution(
        &self,
        stack: &LayerStack,
        omega: f64,
        units: &UnitsSystem,
        min_nodes: f64,
    ) -> Result<(), GreenError> {
        let npw = self.nodes_per_wavelength(stack, omega, units)?;
        if npw < min_nodes {
            return Err(GreenError::UnderResolved {
                nodes_per_wavelength: npw,
                required: min_nodes,
            });
        }
        Ok(())
    }
}
