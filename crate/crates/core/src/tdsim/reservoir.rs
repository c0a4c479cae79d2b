use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Boundary, TdError};
use crate::green1d::{Grid1D, LayerStack};
use crate::pvquad::FrequencyGrid;
use crate::units::UnitsSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirOptions {
    /// Oscillators per site.
    pub n_omega: usize,
    /// Cutoff as a multiple of the largest resonance in the stack.
    pub cutoff_factor: f64,
    /// Explicit cutoff, overriding `cutoff_factor`.
    pub omega_cut: Option<f64>,
}

impl Default for ReservoirOptions {
    fn default() -> Self {
        Self {
            n_omega: 200,
            cutoff_factor: 8.0,
            omega_cut: None,
        }
    }
}

/// Couplings `α(ω_n)·sqrt(Δω_n)` (or `β`) of one node or cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSite {
    pub index: usize,
    pub couplings: Vec<f64>,
}

/// The `ω`-continuum replaced by a quadrature rule: one oscillator per
/// quadrature node at each lossy site.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirDiscretization {
    pub frequencies: FrequencyGrid,
    pub electric: Vec<CouplingSite>,
    pub magnetic: Vec<CouplingSite>,
    resonances: Vec<f64>,
}

impl ReservoirDiscretization {
    /// Couplings from the dual-cell mean of `ε` at nodes and the harmonic
    /// mean of `κ` on cells, the same averaging as the frequency-domain
    /// operator. With closed walls the two end nodes carry no reservoir.
    pub fn build(
        stack: &LayerStack,
        grid: &Grid1D,
        boundary: Boundary,
        options: &ReservoirOptions,
        units: &UnitsSystem,
    ) -> Result<Self, TdError> {
        let resonances: Vec<f64> = {
            let mut r: Vec<f64> = stack
                .layers()
                .iter()
                .flat_map(|l| l.material.electric_poles.iter().chain(&l.material.magnetic_poles))
                .map(|p| p.resonance)
                .collect();
            r.sort_by(f64::total_cmp);
            r.dedup();
            r
        };
        let top = resonances.last().copied().unwrap_or(1.0);
        let cut = options.omega_cut.unwrap_or(options.cutoff_factor * top);
        if options.n_omega == 0 {
            return Err(TdError::InvalidSetup("reservoir needs at least one frequency".into()));
        }
        let frequencies = FrequencyGrid::reservoir(cut, options.n_omega)?;
        let h = grid.h();
        let n = grid.len();
        let cells = match boundary {
            Boundary::Closed => n - 1,
            Boundary::Periodic => n,
        };

        // per-layer responses at every reservoir frequency
        let eps: Vec<Vec<f64>> = stack
            .layers()
            .iter()
            .map(|l| frequencies.nodes().iter().map(|&w| l.material.epsilon(w).im).collect())
            .collect();
        let mu: Vec<Vec<Complex64>> = stack
            .layers()
            .iter()
            .map(|l| frequencies.nodes().iter().map(|&w| l.material.mu(w)).collect())
            .collect();

        let mut electric = Vec::new();
        for i in 0..n {
            if boundary == Boundary::Closed && (i == 0 || i == n - 1) {
                continue;
            }
            let z = grid.node(i);
            let parts = stack.overlaps(z - 0.5 * h, z + 0.5 * h);
            let couplings: Vec<f64> = (0..frequencies.len())
                .map(|k| {
                    let eps_i: f64 = parts.iter().map(|&(l, len)| eps[l][k] * len / h).sum();
                    let w = frequencies.nodes()[k];
                    (2.0 * units.eps0 * w * eps_i.max(0.0) / PI * frequencies.weights()[k]).sqrt()
                })
                .collect();
            if couplings.iter().any(|&a| a > 0.0) {
                electric.push(CouplingSite { index: i, couplings });
            }
        }
        let mut magnetic = Vec::new();
        for c in 0..cells {
            let z = grid.node(c);
            let parts = stack.overlaps(z, z + h);
            let couplings: Vec<f64> = (0..frequencies.len())
                .map(|k| {
                    let m: Complex64 = parts.iter().map(|&(l, len)| mu[l][k] * (len / h)).sum();
                    let kappa_i = m.inv().im;
                    let w = frequencies.nodes()[k];
                    (-2.0 * units.kappa0() * w * kappa_i.min(0.0) / PI * frequencies.weights()[k]).sqrt()
                })
                .collect();
            if couplings.iter().any(|&b| b > 0.0) {
                magnetic.push(CouplingSite { index: c, couplings });
            }
        }
        Ok(Self {
            frequencies,
            electric,
            magnetic,
            resonances,
        })
    }

    /// Explicit sites, for setups not described by a layer stack.
    pub fn from_parts(frequencies: FrequencyGrid, electric: Vec<CouplingSite>, magnetic: Vec<CouplingSite>) -> Result<Self, TdError> {
        for s in electric.iter().chain(&magnetic) {
            if s.couplings.len() != frequencies.len() {
                return Err(TdError::InvalidSetup(format!(
                    "site {} has {} couplings for {} frequencies",
                    s.index,
                    s.couplings.len(),
                    frequencies.len()
                )));
            }
            if s.couplings.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(TdError::InvalidSetup(format!("site {} has a negative or non-finite coupling", s.index)));
            }
        }
        Ok(Self {
            frequencies,
            electric,
            magnetic,
            resonances: Vec::new(),
        })
    }

    pub fn omegas(&self) -> &[f64] {
        self.frequencies.nodes()
    }

    pub fn n_omega(&self) -> usize {
        self.frequencies.len()
    }

    pub fn max_omega(&self) -> f64 {
        self.frequencies.nodes().last().copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.electric.is_empty() && self.magnetic.is_empty()
    }

    /// `2π/Δω` with `Δω` the spacing of the reservoir frequencies around `omega`.
    pub fn recurrence_time(&self, omega: f64) -> f64 {
        let w = self.frequencies.nodes();
        if w.len() < 2 {
            return f64::INFINITY;
        }
        let k = w.partition_point(|&x| x < omega).clamp(1, w.len() - 1);
        2.0 * PI / (w[k] - w[k - 1])
    }

    /// Shortest recurrence time over the material resonances (over the
    /// whole grid when no resonance is known). Runs that rely on the reservoir
    /// acting as a continuum must stay well inside it.
    pub fn recurrence_horizon(&self) -> f64 {
        if self.resonances.is_empty() {
            let w = self.frequencies.nodes();
            return w
                .windows(2)
                .map(|p| 2.0 * PI / (p[1] - p[0]))
                .fold(f64::INFINITY, f64::min);
        }
        self.resonances
            .iter()
            .map(|&r| self.recurrence_time(r))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(1/ε0) Σ_n α_n²/(ω_n² − ω²)` at an electric site: the lossless
    /// susceptibility of the discrete reservoir.
    pub fn discrete_susceptibility(&self, site: &CouplingSite, omega: f64, scale: f64) -> f64 {
        site.couplings
            .iter()
            .zip(self.omegas())
            .map(|(a, w)| a * a / (w * w - omega * omega))
            .sum::<f64>()
            / scale
    }

    /// Smallest eigenvalue of the symmetric matrix `M` with `H = ½ vᵀMv`
    /// restricted to one cell's `(B, Y_1..Y_n)` block, minimized over cells.
    /// The block is rescaled to unit diagonal first, since the lowest
    /// reservoir frequencies would otherwise put `ω_n²` eigenvalues at the
    /// rounding level. Electric blocks are diagonal and positive, so this is
    /// the only place the quadratic form can lose definiteness. Returns `1`
    /// with no magnetic sites.
    pub fn min_energy_eigenvalue(&self, units: &UnitsSystem) -> f64 {
        let n = self.n_omega();
        let mut seen: Vec<&Vec<f64>> = Vec::new();
        let mut best: f64 = 1.0;
        let k0 = units.kappa0().sqrt();
        for site in &self.magnetic {
            if seen.contains(&&site.couplings) {
                continue;
            }
            seen.push(&site.couplings);
            let mut m = DMatrix::<f64>::identity(n + 1, n + 1);
            for (k, (b, w)) in site.couplings.iter().zip(self.omegas()).enumerate() {
                m[(0, k + 1)] = -b / (k0 * w);
                m[(k + 1, 0)] = -b / (k0 * w);
            }
            best = best.min(m.symmetric_eigenvalues().min());
        }
        log::info!("minimum eigenvalue of the discrete energy form: {best:.6e}");
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialModel;

    #[test]
    fn vacuum_has_no_sites() {
        let s = LayerStack::homogeneous(MaterialModel::vacuum());
        let g = Grid1D::spanning(0.0, 1.0, 0.1).unwrap();
        let r = ReservoirDiscretization::build(&s, &g, Boundary::Closed, &ReservoirOptions::default(), &UnitsSystem::natural()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn discrete_sum_rebuilds_static_permittivity() {
        // Σ α_n²/ω_n² → ε0(ε(0) − 1) = ε0 ω_p²/ω_T²
        let m = MaterialModel::electric(&[(1.5, 1.0, 0.2)]).unwrap();
        let s = LayerStack::homogeneous(m);
        let g = Grid1D::spanning(0.0, 1.0, 0.25).unwrap();
        let r = ReservoirDiscretization::build(&s, &g, Boundary::Periodic, &ReservoirOptions { n_omega: 400, ..Default::default() }, &UnitsSystem::natural())
            .unwrap();
        assert_eq!(r.electric.len(), g.len());
        let chi = r.discrete_susceptibility(&r.electric[0], 0.0, 1.0);
        // the tail above the cutoff carries ~ (2/π)·ω_p²γ/(2ω_cut²)
        assert!((chi - 2.25).abs() < 5e-3, "{chi}");
    }

    #[test]
    fn horizon_grows_with_oscillator_count() {
        let m = MaterialModel::electric(&[(1.0, 1.0, 0.1)]).unwrap();
        let s = LayerStack::homogeneous(m);
        let g = Grid1D::spanning(0.0, 1.0, 0.25).unwrap();
        let u = UnitsSystem::natural();
        let h = |n| {
            ReservoirDiscretization::build(&s, &g, Boundary::Periodic, &ReservoirOptions { n_omega: n, ..Default::default() }, &u)
                .unwrap()
                .recurrence_horizon()
        };
        let ratio = h(400) / h(200);
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn passive_magnet_keeps_energy_positive() {
        let m = MaterialModel::magnetic(&[(0.8, 1.0, 0.1)]).unwrap();
        let s = LayerStack::homogeneous(m);
        let g = Grid1D::spanning(0.0, 1.0, 0.25).unwrap();
        let u = UnitsSystem::natural();
        let r = ReservoirDiscretization::build(&s, &g, Boundary::Periodic, &ReservoirOptions::default(), &u).unwrap();
        let e = r.min_energy_eigenvalue(&u);
        assert!(e > 0.0, "{e}");
    }
}
