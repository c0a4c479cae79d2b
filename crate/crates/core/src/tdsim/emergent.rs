use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Boundary, Channel, Drive, Probes, ReservoirOptions, Simulation, TdError};
use crate::green1d::{Grid1D, LayerStack};
use crate::materials::MaterialModel;
use crate::units::UnitsSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergentOptions {
    pub reservoir: ReservoirOptions,
    /// Run length as a fraction of the recurrence horizon.
    pub horizon_fraction: f64,
    /// Ramp length as a fraction of the run.
    pub ramp_fraction: f64,
    /// Analysis starts at this fraction of the run and lasts to its end.
    pub window_start: f64,
    /// Largest relative change of the demodulated amplitudes between the
    /// two halves of the window.
    pub steady_tolerance: f64,
    pub dt: Option<f64>,
}

impl Default for EmergentOptions {
    fn default() -> Self {
        Self {
            reservoir: ReservoirOptions::default(),
            horizon_fraction: 0.6,
            ramp_fraction: 0.25,
            window_start: 0.5,
            steady_tolerance: 0.01,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergentResult {
    pub omega: f64,
    pub channel: Channel,
    /// `ε_est` or `μ_est`.
    pub estimate: Complex64,
    /// `materials.epsilon(ω)` or `materials.mu(ω)`.
    pub exact: Complex64,
    pub relative_error: f64,
    pub horizon: f64,
    pub duration: f64,
    pub drift: f64,
}

/// Least-squares fit of `Re[Â e^{−iωt}] + c` over samples with `t ∈ [t0, t1]`;
/// returns `Â`.
pub fn demodulate(times: &[f64], signal: &[f64], omega: f64, window: (f64, f64)) -> Complex64 {
    let mut m = Matrix3::<f64>::zeros();
    let mut r = Vector3::<f64>::zeros();
    for (&t, &v) in times.iter().zip(signal) {
        if t < window.0 || t > window.1 {
            continue;
        }
        let basis = Vector3::new((omega * t).cos(), (omega * t).sin(), 1.0);
        m += basis * basis.transpose();
        r += basis * v;
    }
    let coef = m.lu().solve(&r).unwrap_or_else(Vector3::zeros);
    Complex64::new(coef[0], coef[1])
}

/// Drives a homogeneous periodic region with a uniform current at `omega`
/// and reads the response off the reservoir: `ε_est = 1 + P/(ε0E)` for the
/// electric channel, `μ_est = κ0B/(κ0B − ΣβY)` for the magnetic one. The
/// run stays inside the recurrence horizon of the discrete reservoir.
pub fn emergent_susceptibility(
    material: &MaterialModel,
    channel: Channel,
    omega: f64,
    options: &EmergentOptions,
    units: &UnitsSystem,
) -> Result<EmergentResult, TdError> {
    if !(omega > 0.0) {
        return Err(TdError::InvalidSetup(format!("probe frequency must be positive, got {omega}")));
    }
    let stack = LayerStack::homogeneous(material.clone());
    // fields stay uniform, so a handful of nodes suffices
    let grid = Grid1D::new(0.0, units.c, 4)?;
    let mut sim = Simulation::from_stack(&stack, grid, Boundary::Periodic, &options.reservoir, *units, options.dt)?;
    let exact = match channel {
        Channel::Electric => material.epsilon(omega),
        Channel::Magnetic => material.mu(omega),
    };
    let horizon = if sim.reservoir.is_empty() {
        f64::INFINITY
    } else {
        sim.reservoir.recurrence_horizon().min(sim.reservoir.recurrence_time(omega))
    };
    let period = 2.0 * PI / omega;
    let duration = if horizon.is_finite() {
        options.horizon_fraction * horizon
    } else {
        40.0 * period
    };
    if duration > horizon {
        return Err(TdError::BeyondRecurrence { duration, horizon });
    }
    log::info!("emergent response at ω = {omega}: recurrence horizon {horizon:.1}, run length {duration:.1}");
    let steps = (duration / sim.dt).ceil() as usize;
    sim.drive = Some(Drive {
        channel,
        omega,
        amplitude: 1.0,
        ramp: options.ramp_fraction * duration,
        sites: None,
    });
    let probes = match channel {
        Channel::Electric => Probes {
            nodes: vec![0],
            cells: vec![],
        },
        Channel::Magnetic => Probes {
            nodes: vec![],
            cells: vec![0],
        },
    };
    let mut state = sim.zero_state();
    let rec = sim.run(&mut state, steps, 1, &probes)?;
    let end = rec.times.last().copied().unwrap_or(0.0);
    let start = options.window_start * end;
    let periods = ((end - start) / period).floor().max(2.0);
    let t0 = end - periods * period;
    let (field, response): (Vec<f64>, Vec<f64>) = match channel {
        Channel::Electric => (rec.e.iter().map(|v| v[0]).collect(), rec.polarization.iter().map(|v| v[0]).collect()),
        Channel::Magnetic => (rec.b.iter().map(|v| v[0]).collect(), rec.h_field.iter().map(|v| v[0]).collect()),
    };
    let fit = |a: f64, b: f64| {
        (
            demodulate(&rec.times, &field, omega, (a, b)),
            demodulate(&rec.times, &response, omega, (a, b)),
        )
    };
    let (f, r) = fit(t0, end);
    let half = t0 + (periods / 2.0).floor() * period;
    let (f1, r1) = fit(t0, half);
    let (f2, r2) = fit(half, end);
    let drift = ((f1.norm() - f2.norm()).abs() / f.norm()).max((r1.norm() - r2.norm()).abs() / r.norm().max(f64::MIN_POSITIVE));
    let estimate = match channel {
        Channel::Electric => 1.0 + r / (f * units.eps0),
        Channel::Magnetic => f * units.kappa0() / r,
    };
    if drift > options.steady_tolerance {
        return Err(TdError::NotSteadyState { drift });
    }
    Ok(EmergentResult {
        omega,
        channel,
        estimate,
        exact,
        relative_error: (estimate - exact).norm() / exact.norm(),
        horizon,
        duration,
        drift,
    })
}
