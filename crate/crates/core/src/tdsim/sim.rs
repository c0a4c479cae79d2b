use serde::Serialize;

use super::{ReservoirDiscretization, ReservoirOptions, TdError};
use crate::green1d::{Grid1D, LayerStack};
use crate::units::UnitsSystem;

/// Closed: perfectly conducting walls at the two end nodes (`E = 0`).
/// Periodic: node `n−1` neighbours node `0` through an extra cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Boundary {
    #[default]
    Closed,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    Electric,
    Magnetic,
}

/// External current `A·r(t)·cos(ωt)` with a `sin²` ramp `r` over
/// `ramp` time units. An electric current enters Ampère's law on nodes, a
/// magnetic current enters Faraday's law on cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    pub channel: Channel,
    pub omega: f64,
    pub amplitude: f64,
    pub ramp: f64,
    /// Nodes (or cells) driven; `None` drives every site.
    pub sites: Option<Vec<usize>>,
}

impl Drive {
    pub fn value(&self, t: f64) -> f64 {
        let r = if t <= 0.0 {
            0.0
        } else if t >= self.ramp {
            1.0
        } else {
            (0.5 * std::f64::consts::PI * t / self.ramp).sin().powi(2)
        };
        self.amplitude * r * (self.omega * t).cos()
    }
}

/// Field and oscillator values at one time. Oscillator arrays are indexed
/// `site * n_omega + k` over the reservoir's electric (X) or magnetic (Y) sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub px: Vec<f64>,
    pub y: Vec<f64>,
    pub py: Vec<f64>,
}

impl SimState {
    pub fn is_finite(&self) -> bool {
        [&self.e, &self.b, &self.x, &self.px, &self.y, &self.py]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyBreakdown {
    /// `Σ h ε0E²/2`
    pub electric: f64,
    /// `Σ h κ0B²/2`
    pub magnetic: f64,
    /// `Σ h ½(Π² + ω²X²)` over both oscillator families.
    pub reservoir: f64,
    /// `−Σ h β Y B`
    pub interaction: f64,
}

impl EnergyBreakdown {
    pub fn field(&self) -> f64 {
        self.electric + self.magnetic
    }

    pub fn total(&self) -> f64 {
        self.electric + self.magnetic + self.reservoir + self.interaction
    }
}

/// Which nodes and cells a run records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Probes {
    pub nodes: Vec<usize>,
    pub cells: Vec<usize>,
}

/// Samples taken every `every` steps, including the initial state.
/// `polarization` is `Σ α X` at the probe nodes, `h_field` is `κ0B − Σ β Y`
/// at the probe cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub energy: Vec<EnergyBreakdown>,
    pub e: Vec<Vec<f64>>,
    pub polarization: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub h_field: Vec<Vec<f64>>,
}

impl RunRecord {
    /// `max |H(t) − H(0)| / H(0)`.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.energy.first() else {
            return 0.0;
        };
        let h0 = first.total();
        self.energy
            .iter()
            .map(|e| (e.total() - h0).abs())
            .fold(0.0, f64::max)
            / h0.abs().max(f64::MIN_POSITIVE)
    }
}

const OVERFLOW: f64 = 1e150;

#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid1D,
    pub boundary: Boundary,
    pub units: UnitsSystem,
    pub reservoir: ReservoirDiscretization,
    pub dt: f64,
    pub drive: Option<Drive>,
    // site lookups: node/cell -> electric/magnetic site index
    e_site: Vec<Option<usize>>,
    m_site: Vec<Option<usize>>,
    steps_taken: usize,
}

impl Simulation {
    pub fn new(grid: Grid1D, boundary: Boundary, reservoir: ReservoirDiscretization, units: UnitsSystem, dt: f64) -> Result<Self, TdError> {
        let light = 0.9 * grid.h() / units.c;
        if !(dt > 0.0) || dt > light {
            return Err(TdError::StepTooLarge {
                dt,
                limit: light,
                reason: "0.9 h/c",
            });
        }
        if !reservoir.is_empty() {
            let osc = 0.2 / reservoir.max_omega();
            if dt > osc {
                return Err(TdError::StepTooLarge {
                    dt,
                    limit: osc,
                    reason: "0.2/max ω_n",
                });
            }
        }
        let n = grid.len();
        let cells = match boundary {
            Boundary::Closed => n - 1,
            Boundary::Periodic => n,
        };
        let mut e_site = vec![None; n];
        for (s, site) in reservoir.electric.iter().enumerate() {
            if site.index >= n || (boundary == Boundary::Closed && (site.index == 0 || site.index == n - 1)) {
                return Err(TdError::InvalidSetup(format!("electric site {} is not an interior node", site.index)));
            }
            e_site[site.index] = Some(s);
        }
        let mut m_site = vec![None; cells];
        for (s, site) in reservoir.magnetic.iter().enumerate() {
            if site.index >= cells {
                return Err(TdError::InvalidSetup(format!("magnetic site {} is not a cell", site.index)));
            }
            m_site[site.index] = Some(s);
        }
        log::debug!(
            "simulation: {n} nodes, {} electric and {} magnetic sites, {} oscillators each, dt = {dt}",
            reservoir.electric.len(),
            reservoir.magnetic.len(),
            reservoir.n_omega()
        );
        Ok(Self {
            grid,
            boundary,
            units,
            reservoir,
            dt,
            drive: None,
            e_site,
            m_site,
            steps_taken: 0,
        })
    }

    /// Builds the reservoir from the stack; `dt = None` picks [`Simulation::default_dt`].
    pub fn from_stack(
        stack: &LayerStack,
        grid: Grid1D,
        boundary: Boundary,
        options: &ReservoirOptions,
        units: UnitsSystem,
        dt: Option<f64>,
    ) -> Result<Self, TdError> {
        let reservoir = ReservoirDiscretization::build(stack, &grid, boundary, options, &units)?;
        let dt = dt.unwrap_or_else(|| Self::default_dt(&grid, &reservoir, &units));
        Self::new(grid, boundary, reservoir, units, dt)
    }

    /// Half of the tighter of the two stability limits.
    pub fn default_dt(grid: &Grid1D, reservoir: &ReservoirDiscretization, units: &UnitsSystem) -> f64 {
        let mut dt = 0.9 * grid.h() / units.c;
        if !reservoir.is_empty() {
            dt = dt.min(0.2 / reservoir.max_omega());
        }
        0.5 * dt
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = Some(drive);
        self
    }

    pub fn cells(&self) -> usize {
        self.m_site.len()
    }

    pub fn n_omega(&self) -> usize {
        self.reservoir.n_omega()
    }

    pub fn zero_state(&self) -> SimState {
        let nx = self.reservoir.electric.len() * self.n_omega();
        let ny = self.reservoir.magnetic.len() * self.n_omega();
        SimState {
            t: 0.0,
            e: vec![0.0; self.grid.len()],
            b: vec![0.0; self.cells()],
            x: vec![0.0; nx],
            px: vec![0.0; nx],
            y: vec![0.0; ny],
            py: vec![0.0; ny],
        }
    }

    fn dynamic_nodes(&self) -> std::ops::Range<usize> {
        match self.boundary {
            Boundary::Closed => 1..self.grid.len() - 1,
            Boundary::Periodic => 0..self.grid.len(),
        }
    }

    fn left_cell(&self, i: usize) -> usize {
        if i == 0 {
            self.cells() - 1
        } else {
            i - 1
        }
    }

    fn right_node(&self, c: usize) -> usize {
        (c + 1) % self.grid.len()
    }

    /// `κ0 B − Σ β Y` on every cell.
    pub fn h_field(&self, s: &SimState) -> Vec<f64> {
        let nw = self.n_omega();
        let k0 = self.units.kappa0();
        let mut hc: Vec<f64> = s.b.iter().map(|b| k0 * b).collect();
        for (m, site) in self.reservoir.magnetic.iter().enumerate() {
            let y = &s.y[m * nw..(m + 1) * nw];
            hc[site.index] -= site.couplings.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
        }
        hc
    }

    /// `Σ α X` on every node.
    pub fn polarization(&self, s: &SimState) -> Vec<f64> {
        let nw = self.n_omega();
        let mut p = vec![0.0; self.grid.len()];
        for (k, site) in self.reservoir.electric.iter().enumerate() {
            let x = &s.x[k * nw..(k + 1) * nw];
            p[site.index] = site.couplings.iter().zip(x).map(|(a, x)| a * x).sum();
        }
        p
    }

    // B/Y potential part: kicks E and Π_Y.
    fn kick_potential(&self, s: &mut SimState, tau: f64) {
        let nw = self.n_omega();
        let hc = self.h_field(s);
        let f = tau / (self.units.eps0 * self.grid.h());
        for i in self.dynamic_nodes() {
            let left = if i == 0 { hc[self.left_cell(0)] } else { hc[i - 1] };
            let right = if i < hc.len() { hc[i] } else { 0.0 };
            s.e[i] += f * (left - right);
        }
        let omegas = self.reservoir.omegas();
        for (m, site) in self.reservoir.magnetic.iter().enumerate() {
            let b = s.b[site.index];
            let (y, py) = (&s.y[m * nw..(m + 1) * nw], &mut s.py[m * nw..(m + 1) * nw]);
            for k in 0..nw {
                py[k] += tau * (site.couplings[k] * b - omegas[k] * omegas[k] * y[k]);
            }
        }
    }

    // E/X part: advances B (A moves with −E) and kicks Π_X.
    fn kick_electric(&self, s: &mut SimState, tau: f64) {
        let nw = self.n_omega();
        let f = tau / self.grid.h();
        for c in 0..self.cells() {
            let r = self.right_node(c);
            s.b[c] -= f * (s.e[r] - s.e[c]);
        }
        let omegas = self.reservoir.omegas();
        for (k, site) in self.reservoir.electric.iter().enumerate() {
            let e = s.e[site.index];
            let (x, px) = (&s.x[k * nw..(k + 1) * nw], &mut s.px[k * nw..(k + 1) * nw]);
            for n in 0..nw {
                px[n] += tau * (site.couplings[n] * e - omegas[n] * omegas[n] * x[n]);
            }
        }
    }

    // kinetic part: oscillators drift, E follows Π_A fixed.
    fn drift(&self, s: &mut SimState, tau: f64) {
        let nw = self.n_omega();
        let f = tau / self.units.eps0;
        for (k, site) in self.reservoir.electric.iter().enumerate() {
            let px = &s.px[k * nw..(k + 1) * nw];
            let j: f64 = site.couplings.iter().zip(px).map(|(a, p)| a * p).sum();
            s.e[site.index] -= f * j;
            for (x, p) in s.x[k * nw..(k + 1) * nw].iter_mut().zip(px) {
                *x += tau * p;
            }
        }
        for (y, p) in s.y.iter_mut().zip(&s.py) {
            *y += tau * p;
        }
    }

    fn apply_drive(&self, s: &mut SimState, tau: f64, t: f64) {
        let Some(d) = &self.drive else { return };
        let v = d.value(t) * tau;
        match d.channel {
            Channel::Electric => {
                let f = v / self.units.eps0;
                let dynamic = self.dynamic_nodes();
                match &d.sites {
                    Some(sites) => sites.iter().filter(|i| dynamic.contains(i)).for_each(|&i| s.e[i] -= f),
                    None => dynamic.for_each(|i| s.e[i] -= f),
                }
            }
            Channel::Magnetic => match &d.sites {
                Some(sites) => {
                    let cells = s.b.len();
                    sites.iter().filter(|&&c| c < cells).for_each(|&c| s.b[c] -= v)
                }
                None => s.b.iter_mut().for_each(|b| *b -= v),
            },
        }
    }

    /// One step of length `dt`.
    pub fn step(&mut self, s: &mut SimState) -> Result<(), TdError> {
        let h = 0.5 * self.dt;
        let t = s.t;
        self.drift(s, h);
        self.kick_potential(s, h);
        self.kick_electric(s, h);
        self.apply_drive(s, self.dt, t + h);
        self.kick_electric(s, h);
        self.kick_potential(s, h);
        self.drift(s, h);
        s.t = t + self.dt;
        self.steps_taken += 1;
        if s.e.iter().chain(&s.b).any(|v| !(v.abs() < OVERFLOW)) {
            return Err(TdError::StabilityViolation {
                step: self.steps_taken,
                t: s.t,
            });
        }
        Ok(())
    }

    /// Runs `steps` steps, sampling every `every` steps.
    pub fn run(&mut self, s: &mut SimState, steps: usize, every: usize, probes: &Probes) -> Result<RunRecord, TdError> {
        let every = every.max(1);
        let mut rec = RunRecord::default();
        self.sample(s, probes, &mut rec);
        for k in 1..=steps {
            self.step(s)?;
            if k % every == 0 {
                self.sample(s, probes, &mut rec);
            }
        }
        Ok(rec)
    }

    fn sample(&self, s: &SimState, probes: &Probes, rec: &mut RunRecord) {
        rec.times.push(s.t);
        rec.energy.push(self.energy(s));
        if !probes.nodes.is_empty() {
            let p = self.polarization(s);
            rec.e.push(probes.nodes.iter().map(|&i| s.e[i]).collect());
            rec.polarization.push(probes.nodes.iter().map(|&i| p[i]).collect());
        }
        if !probes.cells.is_empty() {
            let hc = self.h_field(s);
            rec.b.push(probes.cells.iter().map(|&c| s.b[c]).collect());
            rec.h_field.push(probes.cells.iter().map(|&c| hc[c]).collect());
        }
    }

    /// The discrete Hamiltonian, split into its parts.
    pub fn energy(&self, s: &SimState) -> EnergyBreakdown {
        let h = self.grid.h();
        let nw = self.n_omega();
        let omegas = self.reservoir.omegas();
        let electric = 0.5 * self.units.eps0 * h * s.e.iter().map(|e| e * e).sum::<f64>();
        let magnetic = 0.5 * self.units.kappa0() * h * s.b.iter().map(|b| b * b).sum::<f64>();
        let osc = |q: &[f64], p: &[f64]| -> f64 {
            q.chunks(nw.max(1))
                .zip(p.chunks(nw.max(1)))
                .map(|(q, p)| {
                    q.iter()
                        .zip(p)
                        .zip(omegas)
                        .map(|((q, p), w)| p * p + w * w * q * q)
                        .sum::<f64>()
                })
                .sum::<f64>()
        };
        let reservoir = 0.5 * h * (osc(&s.x, &s.px) + osc(&s.y, &s.py));
        let mut interaction = 0.0;
        for (m, site) in self.reservoir.magnetic.iter().enumerate() {
            let y = &s.y[m * nw..(m + 1) * nw];
            interaction -= h * s.b[site.index] * site.couplings.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
        }
        EnergyBreakdown {
            electric,
            magnetic,
            reservoir,
            interaction,
        }
    }

    pub fn total_energy(&self, s: &SimState) -> f64 {
        self.energy(s).total()
    }

    /// Electric site index of a node, if the node carries a reservoir.
    pub fn electric_site(&self, node: usize) -> Option<usize> {
        self.e_site.get(node).copied().flatten()
    }

    pub fn magnetic_site(&self, cell: usize) -> Option<usize> {
        self.m_site.get(cell).copied().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvquad::FrequencyGrid;
    use crate::tdsim::CouplingSite;

    fn vacuum_sim(n: usize, boundary: Boundary) -> Simulation {
        let grid = Grid1D::new(0.0, 0.1, n).unwrap();
        let r = ReservoirDiscretization::from_parts(FrequencyGrid::reservoir(4.0, 4).unwrap(), vec![], vec![]).unwrap();
        Simulation::new(grid, boundary, r, UnitsSystem::natural(), 0.05).unwrap()
    }

    #[test]
    fn rejects_large_steps() {
        let grid = Grid1D::new(0.0, 0.1, 10).unwrap();
        let r = ReservoirDiscretization::from_parts(FrequencyGrid::reservoir(4.0, 4).unwrap(), vec![], vec![]).unwrap();
        assert!(matches!(
            Simulation::new(grid, Boundary::Closed, r.clone(), UnitsSystem::natural(), 0.1),
            Err(TdError::StepTooLarge { .. })
        ));
        let site = CouplingSite {
            index: 3,
            couplings: vec![0.1; 4],
        };
        let r = ReservoirDiscretization::from_parts(FrequencyGrid::reservoir(4.0, 4).unwrap(), vec![site], vec![]).unwrap();
        // max ω_n is just under 4, so 0.2/ω_max is about 0.051
        assert!(Simulation::new(grid, Boundary::Closed, r.clone(), UnitsSystem::natural(), 0.06).is_err());
        assert!(Simulation::new(grid, Boundary::Closed, r, UnitsSystem::natural(), 0.05).is_ok());
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut sim = vacuum_sim(20, Boundary::Closed);
        let mut s = sim.zero_state();
        for _ in 0..10 {
            sim.step(&mut s).unwrap();
        }
        assert!(s.e.iter().chain(&s.b).all(|v| *v == 0.0));
        assert_eq!(sim.total_energy(&s), 0.0);
    }

    #[test]
    fn periodic_standing_wave_keeps_energy() {
        let mut sim = vacuum_sim(64, Boundary::Periodic);
        let mut s = sim.zero_state();
        let k = 2.0 * std::f64::consts::PI / 6.4;
        for (i, e) in s.e.iter_mut().enumerate() {
            *e = (k * 0.1 * i as f64).sin();
        }
        let e0 = sim.total_energy(&s);
        for _ in 0..1000 {
            sim.step(&mut s).unwrap();
        }
        assert!((sim.total_energy(&s) / e0 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn overflow_is_reported() {
        let mut sim = vacuum_sim(10, Boundary::Closed);
        let mut s = sim.zero_state();
        s.e[4] = f64::NAN;
        assert!(matches!(sim.step(&mut s), Err(TdError::StabilityViolation { .. })));
    }
}
