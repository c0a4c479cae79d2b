use num_complex::Complex64;

use super::{init_pulse, Boundary, Probes, PulseSpec, ReservoirOptions, Simulation, TdError};
use crate::green1d::{transfer, Grid1D, LayerStack};
use crate::materials::MaterialModel;
use crate::units::UnitsSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionOptions {
    pub reservoir: ReservoirOptions,
    pub h: f64,
    pub dt: Option<f64>,
    pub pulse_width: f64,
    pub carrier: f64,
    /// Extra recording time after the pulse peak passes the probe, for the
    /// material's ringing to die out.
    pub tail: f64,
}

impl Default for TransmissionOptions {
    fn default() -> Self {
        Self {
            reservoir: ReservoirOptions {
                n_omega: 400,
                ..Default::default()
            },
            h: 0.05,
            dt: None,
            pulse_width: 2.0,
            carrier: 1.0,
            tail: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    pub omega: f64,
    /// `|t|²` from the ratio of transmitted to incident spectra.
    pub simulated: f64,
    /// `|t|²` from the transfer-matrix solution.
    pub reference: f64,
}

fn spectrum(times: &[f64], signal: &[f64], omega: f64) -> Complex64 {
    times
        .iter()
        .zip(signal)
        .map(|(&t, &v)| v * Complex64::new(0.0, omega * t).exp())
        .sum()
}

/// Sends a Gaussian pulse through the finite layers of `stack` (vacuum on
/// both sides) between closed walls placed far enough away that no wall
/// echo reaches the probe during the recording. The incident spectrum comes
/// from an identical run with every layer replaced by vacuum, so the
/// lattice dispersion of the free propagation cancels in the ratio.
pub fn transmission_spectrum(stack: &LayerStack, omegas: &[f64], options: &TransmissionOptions, units: &UnitsSystem) -> Result<Vec<TransmissionPoint>, TdError> {
    if !stack.left().is_vacuum() || !stack.right().is_vacuum() {
        return Err(TdError::InvalidSetup("transmission runs need vacuum on both sides".into()));
    }
    let (_, thickness) = stack.extent();
    let w = options.pulse_width;
    let reach = PulseSpec::REACH * w;
    let gap = 1.0;
    let center = -reach - gap;
    let probe = thickness + gap;
    let record = (probe - center + options.tail * units.c) / units.c;
    // walls beyond anything that can travel back to the probe in time
    let margin = reach + gap + record * units.c;
    let grid = Grid1D::covering(stack, options.h, margin)?;
    let spec = PulseSpec {
        center,
        width: w,
        carrier: options.carrier,
        amplitude: 1.0,
        direction: 1.0,
    };
    let vacuum = LayerStack::homogeneous(MaterialModel::vacuum());
    let mut sim = Simulation::from_stack(stack, grid, Boundary::Closed, &options.reservoir, *units, options.dt)?;
    if !sim.reservoir.is_empty() {
        let horizon = sim.reservoir.recurrence_horizon();
        log::info!("transmission run: {record:.1} time units, recurrence horizon {horizon:.1}");
        if record > horizon {
            return Err(TdError::BeyondRecurrence { duration: record, horizon });
        }
    }
    let dt = sim.dt;
    let mut reference = Simulation::from_stack(&vacuum, grid, Boundary::Closed, &options.reservoir, *units, Some(dt))?;
    let steps = (record / dt).ceil() as usize;
    let probes = Probes {
        nodes: vec![grid.nearest(probe)],
        cells: vec![],
    };
    let mut s = init_pulse(&sim, stack, &spec)?;
    let out = sim.run(&mut s, steps, 1, &probes)?;
    let mut s = init_pulse(&reference, &vacuum, &spec)?;
    let inc = reference.run(&mut s, steps, 1, &probes)?;
    let trans: Vec<f64> = out.e.iter().map(|v| v[0]).collect();
    let incident: Vec<f64> = inc.e.iter().map(|v| v[0]).collect();
    omegas
        .iter()
        .map(|&omega| {
            let t = spectrum(&out.times, &trans, omega) / spectrum(&inc.times, &incident, omega);
            let tmm = transfer::scattering(stack, omega, units)?.t;
            Ok(TransmissionPoint {
                omega,
                simulated: t.norm_sqr(),
                reference: tmm.norm_sqr(),
            })
        })
        .collect()
}
