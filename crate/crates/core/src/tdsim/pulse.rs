use super::{Boundary, SimState, Simulation, TdError};
use crate::green1d::LayerStack;
use crate::units::UnitsSystem;

/// `E(z) = A exp(−s²/2w²) cos(k s)` with `s = z − center`, `k = ω/c`, and
/// the matching `B = ±E/c` of a pulse travelling in `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
    pub amplitude: f64,
    /// `+1` travels towards `+z`, `−1` towards `−z`.
    pub direction: f64,
}

impl PulseSpec {
    /// Envelope cut-off used for the overlap check, in widths.
    pub const REACH: f64 = 6.0;

    pub fn field(&self, z: f64, units: &UnitsSystem) -> f64 {
        let s = z - self.center;
        let k = self.carrier / units.c;
        self.amplitude * (-0.5 * s * s / (self.width * self.width)).exp() * (k * s).cos()
    }
}

/// `ε0 ∫E² dz = ε0 A² (√π w/2)(1 + e^{−k²w²})`, the energy of the
/// continuum pulse (electric and magnetic halves equal).
pub fn gaussian_pulse_energy(spec: &PulseSpec, units: &UnitsSystem) -> f64 {
    let k = spec.carrier / units.c;
    let w = spec.width;
    units.eps0 * spec.amplitude * spec.amplitude * 0.5 * std::f64::consts::PI.sqrt() * w * (1.0 + (-k * k * w * w).exp())
}

/// A pulse in vacuum with the reservoir at rest. Fails if the envelope,
/// cut at six widths, reaches a material layer of `stack`.
pub fn init_pulse(sim: &Simulation, stack: &LayerStack, spec: &PulseSpec) -> Result<SimState, TdError> {
    if !(spec.width > 0.0) || !spec.amplitude.is_finite() || spec.direction.abs() != 1.0 {
        return Err(TdError::InvalidSetup(format!(
            "pulse needs width > 0, finite amplitude and direction ±1 (got {spec:?})"
        )));
    }
    let reach = PulseSpec::REACH * spec.width;
    let (lo, hi) = (spec.center - reach, spec.center + reach);
    for (idx, _) in stack.overlaps(lo, hi) {
        let layer = &stack.layers()[idx];
        if !layer.material.is_vacuum() {
            return Err(TdError::PulseOverlapsMaterial {
                layer: layer.name.clone(),
                reach,
            });
        }
    }
    let mut s = sim.zero_state();
    let u = &sim.units;
    let g = &sim.grid;
    for (i, e) in s.e.iter_mut().enumerate() {
        *e = spec.field(g.node(i), u);
    }
    if sim.boundary == Boundary::Closed {
        s.e[0] = 0.0;
        let n = s.e.len();
        s.e[n - 1] = 0.0;
    }
    for (c, b) in s.b.iter_mut().enumerate() {
        *b = spec.direction * spec.field(g.node(c) + 0.5 * g.h(), u) / u.c;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green1d::Grid1D;
    use crate::materials::MaterialModel;
    use crate::tdsim::ReservoirOptions;

    fn setup() -> (LayerStack, Simulation) {
        let stack = LayerStack::slab(MaterialModel::vacuum(), MaterialModel::electric(&[(1.0, 1.0, 0.2)]).unwrap(), 2.0).unwrap();
        let grid = Grid1D::spanning(-30.0, 10.0, 0.05).unwrap();
        let sim = Simulation::from_stack(&stack, grid, Boundary::Closed, &ReservoirOptions { n_omega: 20, ..Default::default() }, UnitsSystem::natural(), None)
            .unwrap();
        (stack, sim)
    }

    fn spec(center: f64) -> PulseSpec {
        PulseSpec {
            center,
            width: 2.0,
            carrier: 1.0,
            amplitude: 1.0,
            direction: 1.0,
        }
    }

    #[test]
    fn energy_matches_closed_form() {
        let (stack, sim) = setup();
        let s = init_pulse(&sim, &stack, &spec(-15.0)).unwrap();
        let e = sim.energy(&s);
        let exact = gaussian_pulse_energy(&spec(-15.0), &sim.units);
        assert!((e.total() / exact - 1.0).abs() < 1e-2);
        assert_eq!(e.reservoir, 0.0);
    }

    #[test]
    fn zero_amplitude_gives_zero_state() {
        let (stack, sim) = setup();
        let s = init_pulse(&sim, &stack, &PulseSpec { amplitude: 0.0, ..spec(-15.0) }).unwrap();
        assert!(s.e.iter().chain(&s.b).all(|v| *v == 0.0));
    }

    #[test]
    fn overlap_is_refused() {
        let (stack, sim) = setup();
        assert!(matches!(init_pulse(&sim, &stack, &spec(-5.0)), Err(TdError::PulseOverlapsMaterial { .. })));
    }
}
