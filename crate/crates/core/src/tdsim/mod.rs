//! Classical time-domain simulation of the field coupled to discretized
//! reservoir oscillators, in one dimension (`E = E_x(z)`, `B = B_y(z)`).
//!
//! `E` and the electric oscillators live on nodes, `B` and the magnetic
//! oscillators on cells. All quantities are stored at the same time level;
//! the staggering is inside the step, which is a symmetric composition of
//! three exactly solvable shears of the discrete Hamiltonian.

mod emergent;
mod pulse;
mod reservoir;
mod sim;
mod sources;
mod transmission;

pub use emergent::{demodulate, emergent_susceptibility, EmergentOptions, EmergentResult};
pub use pulse::{gaussian_pulse_energy, init_pulse, PulseSpec};
pub use reservoir::{CouplingSite, ReservoirDiscretization, ReservoirOptions};
pub use sim::{Boundary, Channel, Drive, EnergyBreakdown, Probes, RunRecord, SimState, Simulation};
pub use sources::{continuity_residual, free_current_from_amplitudes, FreeSources, SourceAmplitudes};
pub use transmission::{transmission_spectrum, TransmissionOptions, TransmissionPoint};

use crate::green1d::GreenError;
use crate::materials::MaterialError;
use crate::pvquad::PvError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TdError {
    #[error("time step {dt} exceeds the stability limit {limit} ({reason})")]
    StepTooLarge { dt: f64, limit: f64, reason: &'static str },
    #[error("initial pulse overlaps material layer '{layer}' (envelope reaches {reach})")]
    PulseOverlapsMaterial { layer: String, reach: f64 },
    #[error("field overflow at step {step} (t = {t})")]
    StabilityViolation { step: usize, t: f64 },
    #[error("response amplitude drifts by {drift:.3e} across the analysis window")]
    NotSteadyState { drift: f64 },
    #[error("run of length {duration} exceeds the reservoir recurrence horizon {horizon}")]
    BeyondRecurrence { duration: f64, horizon: f64 },
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Quadrature(#[from] PvError),
}
