use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Boundary, Simulation, TdError};

/// Free-oscillation amplitudes `Z_n` (electric sites) and `W_n` (magnetic
/// sites) of the discrete reservoir, laid out like the oscillator arrays of
/// [`SimState`](super::SimState). Each amplitude carries the factor
/// `sqrt(Δω_n)` so that `Σ_n coupling·amplitude` is the quadrature of the
/// `ω`-integral. `longitudinal` is the `z` component of `Z`, `transverse`
/// its `x` component.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceAmplitudes {
    pub longitudinal: Vec<Complex64>,
    pub transverse: Vec<Complex64>,
    pub magnetic: Vec<Complex64>,
}

impl SourceAmplitudes {
    pub fn zeros(sim: &Simulation) -> Self {
        let nw = sim.n_omega();
        Self {
            longitudinal: vec![Complex64::new(0.0, 0.0); sim.reservoir.electric.len() * nw],
            transverse: vec![Complex64::new(0.0, 0.0); sim.reservoir.electric.len() * nw],
            magnetic: vec![Complex64::new(0.0, 0.0); sim.reservoir.magnetic.len() * nw],
        }
    }
}

/// Free charge on cells, longitudinal current `j_z` and transverse current
/// `j_x` on nodes, at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSources {
    pub t: f64,
    pub charge: Vec<f64>,
    pub current_longitudinal: Vec<f64>,
    pub current_transverse: Vec<f64>,
    /// `∂_t σ`, evaluated from the same amplitudes in closed form.
    pub charge_rate: Vec<f64>,
}

fn check(sim: &Simulation, src: &SourceAmplitudes) -> Result<(), TdError> {
    let z = SourceAmplitudes::zeros(sim);
    if src.longitudinal.len() != z.longitudinal.len() || src.transverse.len() != z.transverse.len() || src.magnetic.len() != z.magnetic.len() {
        return Err(TdError::InvalidSetup("source amplitudes do not match the reservoir layout".into()));
    }
    Ok(())
}

/// `2 Re Σ_n c_n A_n (−iω_n)^p e^{−iω_n t}` per site, scattered onto `len` slots.
fn site_sums(sim: &Simulation, sites: &[super::CouplingSite], amps: &[Complex64], t: f64, power: u32, len: usize) -> Vec<f64> {
    let nw = sim.n_omega();
    let omegas = sim.reservoir.omegas();
    let mut out = vec![0.0; len];
    for (k, site) in sites.iter().enumerate() {
        let a = &amps[k * nw..(k + 1) * nw];
        let s: Complex64 = (0..nw)
            .map(|n| site.couplings[n] * a[n] * Complex64::new(0.0, -omegas[n]).powu(power) * Complex64::new(0.0, -omegas[n] * t).exp())
            .sum();
        out[site.index] = 2.0 * s.re;
    }
    out
}

/// `σ = −(1/2π) ∂_z S`, `j_z = (1/2π) ∂_t S` with `S = Σ[α Z_z e^{−iωt} + c.c.]`,
/// and `j_x = (1/2π) ∂_t Σ[α Z_x e^{−iωt} + c.c.] − (1/2π) ∂_z Σ[β W e^{−iωt} + c.c.]`.
/// `∂_z` of node data lands on cells and vice versa, so `∂_t σ + ∂_z j_z`
/// vanishes identically on the grid.
pub fn free_current_from_amplitudes(sim: &Simulation, src: &SourceAmplitudes, t: f64) -> Result<FreeSources, TdError> {
    check(sim, src)?;
    let n = sim.grid.len();
    let cells = sim.cells();
    let h = sim.grid.h();
    let k = 1.0 / (2.0 * PI);
    let s = site_sums(sim, &sim.reservoir.electric, &src.longitudinal, t, 0, n);
    let ds = site_sums(sim, &sim.reservoir.electric, &src.longitudinal, t, 1, n);
    let right = |c: usize| (c + 1) % n;
    let charge: Vec<f64> = (0..cells).map(|c| -k * (s[right(c)] - s[c]) / h).collect();
    let charge_rate: Vec<f64> = (0..cells).map(|c| -k * (ds[right(c)] - ds[c]) / h).collect();
    let current_longitudinal: Vec<f64> = ds.iter().map(|v| k * v).collect();

    let dx = site_sums(sim, &sim.reservoir.electric, &src.transverse, t, 1, n);
    let w = site_sums(sim, &sim.reservoir.magnetic, &src.magnetic, t, 0, cells);
    let current_transverse: Vec<f64> = (0..n)
        .map(|i| {
            let left = match (i, sim.boundary) {
                (0, Boundary::Periodic) => w[cells - 1],
                (0, Boundary::Closed) => 0.0,
                _ => w[i - 1],
            };
            let here = if i < cells { w[i] } else { 0.0 };
            k * dx[i] - k * (here - left) / h
        })
        .collect();
    Ok(FreeSources {
        t,
        charge,
        current_longitudinal,
        current_transverse,
        charge_rate,
    })
}

/// `max |∂_t σ + ∂_z j_z|` over cells, relative to `max |∂_z j_z|`.
pub fn continuity_residual(sim: &Simulation, sources: &FreeSources) -> f64 {
    let n = sim.grid.len();
    let h = sim.grid.h();
    let j = &sources.current_longitudinal;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (c, rate) in sources.charge_rate.iter().enumerate() {
        let div = (j[(c + 1) % n] - j[c]) / h;
        worst = worst.max((rate + div).abs());
        scale = scale.max(div.abs());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}
