//! The full invariant suite behind `maxqed verify`: every check runs one
//! module pipeline at a fixed, documented setting and compares a single
//! number against a tolerance from [`Tolerances`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::green1d::{
    homogeneous_green, reflection_from_column, solve_green, solve_green_column, transfer, DiscreteOperator, Grid1D, LayerStack,
};
use crate::materials::{kk_reconstruct, presets, KkOptions, LorentzPole, MaterialModel};
use crate::modes::{
    charge_conservation_check, charge_conservation_residual, charge_kernels, fdt_identity_check, fdt_relative_residual, hcon_residual, mode_equation_residual,
    mode_fe, ExteriorFlux,
};
use crate::pvquad::{pole_identity_a, pole_identity_b, FrequencyGrid};
use crate::tdsim::{
    continuity_residual, emergent_susceptibility, free_current_from_amplitudes, init_pulse, transmission_spectrum, Boundary, Channel, EmergentOptions,
    Probes, PulseSpec, ReservoirDiscretization, ReservoirOptions, Simulation, SourceAmplitudes, TransmissionOptions,
};
use crate::units::UnitsSystem;

/// Every pass/fail threshold used by the suite, by name. Keys are the
/// field names; `set` accepts the same names for command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub kk_relative: f64,
    pub kk_min_order: f64,
    pub pole_identity: f64,
    pub green_order_band: f64,
    pub green_reciprocity: f64,
    pub green_residual: f64,
    pub reflection: f64,
    pub emergent_coarse: f64,
    pub emergent_fine: f64,
    pub emergent_magnetic: f64,
    pub energy_drift: f64,
    pub energy_order_band: f64,
    /// Allowed rise of the per-period peak EM energy, relative to the
    /// initial energy, once the pulse is in the slab.
    pub absorption_ripple: f64,
    pub transmission: f64,
    pub fdt: f64,
    pub fdt_order_band: f64,
    pub hcon: f64,
    pub mode_equation: f64,
    pub charge: f64,
    pub continuity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kk_relative: 1e-3,
            kk_min_order: 1.5,
            pole_identity: 1e-10,
            green_order_band: 0.2,
            green_reciprocity: 1e-10,
            green_residual: 1e-8,
            reflection: 1e-8,
            emergent_coarse: 0.02,
            emergent_fine: 0.01,
            emergent_magnetic: 0.02,
            energy_drift: 1e-4,
            energy_order_band: 0.2,
            absorption_ripple: 1e-4,
            transmission: 0.03,
            fdt: 1e-6,
            fdt_order_band: 0.2,
            hcon: 1e-12,
            mode_equation: 1e-8,
            charge: 1e-12,
            continuity: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn keys() -> Vec<String> {
        match serde_json::to_value(Self::default()) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("tolerance {key} must be finite and non-negative, got {value}"));
        }
        let mut v = serde_json::to_value(&*self).map_err(|e| e.to_string())?;
        match v.get_mut(key) {
            Some(slot) => *slot = serde_json::json!(value),
            None => return Err(format!("unknown tolerance '{key}' (known: {})", Self::keys().join(", "))),
        }
        *self = serde_json::from_value(v).map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// Workload sizes of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSettings {
    pub seed: u64,
    pub kk_panels: usize,
    pub identity_samples: usize,
    pub identity_etas: Vec<f64>,
    pub identity_floor: f64,
    pub green_steps: Vec<f64>,
    pub reflection_step: f64,
    /// Probe frequencies of the emergent-response check, in units of the
    /// resonance of the single-Lorentz preset.
    pub emergent_probes: Vec<f64>,
    pub emergent_coarse: usize,
    pub emergent_fine: usize,
    pub energy_periods: f64,
    pub energy_step: f64,
    pub transmission_frequencies: Vec<f64>,
    pub fdt_steps: Vec<f64>,
    pub charge_samples: usize,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            seed: 7,
            kk_panels: 400,
            identity_samples: 1000,
            identity_etas: vec![1e-1, 1e-4],
            identity_floor: 1e-12,
            green_steps: vec![0.1, 0.05, 0.025, 0.0125],
            reflection_step: 2e-4,
            emergent_probes: vec![0.5, 0.8, 2.0],
            emergent_coarse: 200,
            emergent_fine: 400,
            energy_periods: 10.0,
            energy_step: 0.05,
            transmission_frequencies: vec![0.6, 0.9, 1.0, 1.2, 1.5],
            fdt_steps: vec![0.01, 0.005, 0.0025],
            charge_samples: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value ≤ tolerance`.
    AtMost,
    /// `value ≥ tolerance`.
    AtLeast,
    /// `|value − target| ≤ tolerance`.
    Near { target: i32 },
    /// Reported, never fails.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

impl CheckResult {
    fn judge(name: &str, value: f64, tolerance: f64, comparison: Comparison, detail: String) -> Self {
        let passed = value.is_finite()
            && match comparison {
                Comparison::AtMost => value <= tolerance,
                Comparison::AtLeast => value >= tolerance,
                Comparison::Near { target } => (value - target as f64).abs() <= tolerance,
                Comparison::Info => true,
            };
        Self {
            name: name.into(),
            value,
            tolerance,
            comparison,
            passed,
            seconds: 0.0,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, comparison: Comparison, err: impl std::fmt::Display) -> Self {
        Self {
            passed: false,
            ..Self::judge(name, f64::NAN, tolerance, comparison, format!("error: {err}"))
        }
    }

    pub fn line(&self) -> String {
        let rel = match self.comparison {
            Comparison::AtMost => format!("<= {:.3e}", self.tolerance),
            Comparison::AtLeast => format!(">= {:.3e}", self.tolerance),
            Comparison::Near { target } => format!("= {target} ± {}", self.tolerance),
            Comparison::Info => "(info)".into(),
        };
        format!(
            "{} {:<28} {:>12.4e} {:<20} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            rel,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub failed: usize,
    pub seconds: f64,
}

type Check = fn(&SuiteSettings, &Tolerances) -> CheckResult;

/// Name and entry point of every check, in report order.
pub const CHECKS: [(&str, Check); 19] = [
    ("kk_presets", kk_presets),
    ("kk_refinement_order", kk_refinement_order),
    ("pole_identities", pole_identities),
    ("green_vacuum_order", green_vacuum_order),
    ("green_reciprocity", green_reciprocity),
    ("green_residual", green_residual),
    ("halfspace_reflection", halfspace_reflection),
    ("emergent_epsilon_coarse", emergent_epsilon_coarse),
    ("emergent_epsilon_fine", emergent_epsilon_fine),
    ("emergent_mu", emergent_mu),
    ("energy_drift", energy_drift),
    ("energy_dt2_order", energy_dt2_order),
    ("absorption_monotone", absorption_monotone),
    ("slab_transmission", slab_transmission),
    ("fdt_identity", fdt_identity),
    ("fdt_refinement_order", fdt_refinement_order),
    ("hcon_and_mode_equation", hcon_and_mode_equation),
    ("charge_conservation", charge_conservation),
    ("free_current_continuity", free_current_continuity),
];

/// Runs every check (in parallel on the current rayon pool) and returns
/// them in [`CHECKS`] order, followed by the informational
/// energy-form eigenvalue.
pub fn run_suite(settings: &SuiteSettings, tol: &Tolerances) -> VerifyReport {
    let start = Instant::now();
    let mut checks: Vec<CheckResult> = CHECKS.par_iter().map(|(_, f)| timed(*f, settings, tol)).collect();
    checks.push(timed(energy_form_eigenvalue, settings, tol));
    let failed = checks.iter().filter(|c| !c.passed).count();
    VerifyReport {
        checks,
        failed,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_check(name: &str, settings: &SuiteSettings, tol: &Tolerances) -> Option<CheckResult> {
    CHECKS.iter().find(|(n, _)| *n == name).map(|(_, f)| timed(*f, settings, tol))
}

pub fn timed(check: Check, settings: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let t = Instant::now();
    let mut r = check(settings, tol);
    r.seconds = t.elapsed().as_secs_f64();
    log::info!("{}", r.line());
    r
}

fn natural() -> UnitsSystem {
    UnitsSystem::natural()
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn pole(p: f64, t: f64, g: f64) -> LorentzPole {
    LorentzPole::new(p, t, g).expect("suite poles are valid")
}

fn single_lorentz() -> MaterialModel {
    MaterialModel::electric(&[(1.0, 1.0, 0.1)]).expect("valid")
}

fn magnetodielectric() -> MaterialModel {
    MaterialModel::new(vec![pole(0.8, 1.0, 0.05)], vec![pole(0.6, 1.3, 0.2)]).expect("valid")
}

fn lossy_slab() -> LayerStack {
    LayerStack::slab(MaterialModel::vacuum(), MaterialModel::electric(&[(1.0, 1.0, 0.5)]).expect("valid"), 2.0).expect("valid")
}

/// Max over `ω′ ∈ [0.1, 5]·ω_T` of `|KK − (ε_R − 1)|`, over `max |ε_R − 1|`.
pub fn kk_sweep_error(model: &MaterialModel, grid: &FrequencyGrid, opts: &KkOptions) -> Result<f64, crate::materials::MaterialError> {
    let im = grid.sample(|w| model.epsilon(w).im);
    let wt = model.min_resonance().unwrap_or(1.0);
    let (mut err, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..=100 {
        let w = wt * (0.1 + 4.9 * i as f64 / 100.0);
        let v = kk_reconstruct(grid, &im, w, opts)?;
        let exact = model.epsilon(w).re - 1.0;
        err = err.max((v - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

pub fn kk_presets(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "kk_presets";
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (preset, m) in presets() {
        let e = m.kk_grid(s.kk_panels).and_then(|g| kk_sweep_error(&m, &g, &KkOptions::default()));
        match e {
            Ok(e) => {
                worst = worst.max(e);
                parts.push(format!("{preset} {e:.2e}"));
            }
            Err(e) => return CheckResult::failed(name, tol.kk_relative, Comparison::AtMost, e),
        }
    }
    CheckResult::judge(name, worst, tol.kk_relative, Comparison::AtMost, parts.join(", "))
}

pub fn kk_refinement_order(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "kk_refinement_order";
    let loose = KkOptions {
        max_relative_spacing: 1.0,
        ..KkOptions::default()
    };
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for (preset, m) in presets() {
        let errs: Result<Vec<f64>, _> = [s.kk_panels / 4, s.kk_panels / 2]
            .iter()
            .map(|&p| m.kk_grid(p).and_then(|g| kk_sweep_error(&m, &g, &loose)))
            .collect();
        match errs {
            Ok(e) => {
                let p = order(e[0], e[1]);
                worst = worst.min(p);
                parts.push(format!("{preset} {p:.2}"));
            }
            Err(e) => return CheckResult::failed(name, tol.kk_min_order, Comparison::AtLeast, e),
        }
    }
    CheckResult::judge(name, worst, tol.kk_min_order, Comparison::AtLeast, parts.join(", "))
}

pub fn pole_identities(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "pole_identities";
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..s.identity_samples {
        let (w, wp, wpp): (f64, f64, f64) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        for &eta in &s.identity_etas {
            worst = worst.max(pole_identity_a(w, wp, wpp, eta).norm());
            match pole_identity_b(w, wp, wpp, eta, s.identity_floor) {
                Ok(r) => worst = worst.max(r.norm()),
                Err(e) => return CheckResult::failed(name, tol.pole_identity, Comparison::AtMost, e),
            }
        }
    }
    let detail = format!("{} triples × η {:?}", s.identity_samples, s.identity_etas);
    CheckResult::judge(name, worst, tol.pole_identity, Comparison::AtMost, detail)
}

fn vacuum_error(h: f64) -> Result<f64, crate::green1d::GreenError> {
    let u = natural();
    let one = Complex64::new(1.0, 0.0);
    let g = Grid1D::spanning(-5.0, 5.0, h)?;
    let sol = solve_green(&LayerStack::homogeneous(MaterialModel::vacuum()), 1.0, &g, &u)?;
    let mut e: f64 = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            let exact = homogeneous_green(one, one, 1.0, g.node(i), g.node(j), &u)?;
            e = e.max((sol.kernel[(i, j)] - exact).norm());
        }
    }
    Ok(e)
}

pub fn green_vacuum_order(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "green_vacuum_order";
    let cmp = Comparison::Near { target: 2 };
    let errs: Result<Vec<f64>, _> = s.green_steps.iter().map(|&h| vacuum_error(h)).collect();
    let errs = match errs {
        Ok(e) if e.len() >= 2 => e,
        Ok(_) => return CheckResult::failed(name, tol.green_order_band, cmp, "need at least two grid steps"),
        Err(e) => return CheckResult::failed(name, tol.green_order_band, cmp, e),
    };
    let orders: Vec<f64> = errs.windows(2).map(|w| order(w[0], w[1])).collect();
    // report the order furthest from 2
    let worst = orders.iter().copied().fold(2.0f64, |a, o| if (o - 2.0).abs() > (a - 2.0).abs() { o } else { a });
    let detail = format!("orders {:?}", orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>());
    CheckResult::judge(name, worst, tol.green_order_band, cmp, detail)
}

fn slab_green() -> Result<crate::green1d::GreenSolution, crate::green1d::GreenError> {
    let stack = LayerStack::slab(MaterialModel::vacuum(), magnetodielectric(), 0.7)?;
    let grid = Grid1D::covering(&stack, 0.01, 1.0)?;
    solve_green(&stack, 1.2, &grid, &natural())
}

pub fn green_reciprocity(_: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "green_reciprocity";
    match slab_green() {
        Ok(g) => CheckResult::judge(name, g.reciprocity_error(), tol.green_reciprocity, Comparison::AtMost, "magnetodielectric slab, ω=1.2".into()),
        Err(e) => CheckResult::failed(name, tol.green_reciprocity, Comparison::AtMost, e),
    }
}

pub fn green_residual(_: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "green_residual";
    match slab_green() {
        Ok(g) => CheckResult::judge(name, g.residual_norm(), tol.green_residual, Comparison::AtMost, "max |A·g·h − I|".into()),
        Err(e) => CheckResult::failed(name, tol.green_residual, Comparison::AtMost, e),
    }
}

pub fn halfspace_reflection(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "halfspace_reflection";
    let run = || -> Result<(Complex64, Complex64), crate::green1d::GreenError> {
        let u = natural();
        let m = MaterialModel::new(vec![pole(1.0, 1.0, 0.1)], vec![pole(0.5, 2.0, 0.2)]).expect("valid");
        let stack = LayerStack::interface(MaterialModel::vacuum(), m.clone());
        let w = 0.8;
        let one = Complex64::new(1.0, 0.0);
        let exact = transfer::interface_reflection((one, one), (m.epsilon(w), m.kappa(w)?), w, &u)?;
        let grid = Grid1D::covering(&stack, s.reflection_step, 3.0)?;
        let op = DiscreteOperator::assemble(&stack, &grid, w, &u)?;
        let (col, _) = solve_green_column(&op, grid.nearest(-2.0))?;
        let r = reflection_from_column(&op, &col, (grid.nearest(-1.0), grid.nearest(-0.5)), 0.0);
        Ok((r, exact))
    };
    match run() {
        Ok((r, exact)) => CheckResult::judge(name, (r - exact).norm(), tol.reflection, Comparison::AtMost, format!("r = {r:.6}, transfer matrix {exact:.6}")),
        Err(e) => CheckResult::failed(name, tol.reflection, Comparison::AtMost, e),
    }
}

fn emergent(name: &str, channel: Channel, n_omega: usize, tolerance: f64, s: &SuiteSettings) -> CheckResult {
    let (m, wt) = match channel {
        Channel::Electric => (single_lorentz(), 1.0),
        Channel::Magnetic => (MaterialModel::magnetic(&[(1.0, 1.0, 0.1)]).expect("valid"), 1.0),
    };
    let opts = EmergentOptions {
        reservoir: ReservoirOptions {
            n_omega,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &p in &s.emergent_probes {
        match emergent_susceptibility(&m, channel, p * wt, &opts, &natural()) {
            Ok(r) => {
                worst = worst.max(r.relative_error);
                parts.push(format!("ω={:.2}: {:.2e} (run {:.0}/{:.0})", r.omega, r.relative_error, r.duration, r.horizon));
            }
            Err(e) => return CheckResult::failed(name, tolerance, Comparison::AtMost, e),
        }
    }
    CheckResult::judge(name, worst, tolerance, Comparison::AtMost, format!("N_ω={n_omega}; {}", parts.join(", ")))
}

pub fn emergent_epsilon_coarse(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    emergent("emergent_epsilon_coarse", Channel::Electric, s.emergent_coarse, tol.emergent_coarse, s)
}

pub fn emergent_epsilon_fine(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    emergent("emergent_epsilon_fine", Channel::Electric, s.emergent_fine, tol.emergent_fine, s)
}

pub fn emergent_mu(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    emergent("emergent_mu", Channel::Magnetic, s.emergent_coarse, tol.emergent_magnetic, s)
}

/// A pulse from `z = −15` absorbed by a 2-wide lossy slab; returns the
/// step used and the run record.
pub fn absorbed_pulse_run(s: &SuiteSettings, dt: Option<f64>) -> Result<(f64, crate::tdsim::RunRecord), crate::tdsim::TdError> {
    let stack = lossy_slab();
    let grid = Grid1D::spanning(-30.0, 10.0, s.energy_step)?;
    let mut sim = Simulation::from_stack(&stack, grid, Boundary::Closed, &ReservoirOptions::default(), natural(), dt)?;
    let spec = PulseSpec {
        center: -15.0,
        width: 2.0,
        carrier: 1.0,
        amplitude: 1.0,
        direction: 1.0,
    };
    let steps = (s.energy_periods * 2.0 * std::f64::consts::PI / sim.dt).ceil() as usize;
    let mut state = init_pulse(&sim, &stack, &spec)?;
    let rec = sim.run(&mut state, steps, 10, &Probes::default())?;
    Ok((sim.dt, rec))
}

pub fn energy_drift(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "energy_drift";
    match absorbed_pulse_run(s, None) {
        Ok((dt, rec)) => {
            let last = rec.energy.last().copied().unwrap_or_default();
            let frac = last.reservoir / rec.energy[0].total();
            let detail = format!("dt={dt:.4}, {:.0} periods, {:.0}% absorbed", s.energy_periods, 100.0 * frac);
            CheckResult::judge(name, rec.energy_drift(), tol.energy_drift, Comparison::AtMost, detail)
        }
        Err(e) => CheckResult::failed(name, tol.energy_drift, Comparison::AtMost, e),
    }
}

pub fn energy_dt2_order(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "energy_dt2_order";
    let cmp = Comparison::Near { target: 2 };
    let run = || -> Result<(f64, f64, f64), crate::tdsim::TdError> {
        let (dt, a) = absorbed_pulse_run(s, None)?;
        let (_, b) = absorbed_pulse_run(s, Some(0.5 * dt))?;
        Ok((dt, a.energy_drift(), b.energy_drift()))
    };
    match run() {
        Ok((dt, a, b)) => CheckResult::judge(name, order(a, b), tol.energy_order_band, cmp, format!("drift {a:.3e} at dt={dt:.4}, {b:.3e} at dt/2")),
        Err(e) => CheckResult::failed(name, tol.energy_order_band, cmp, e),
    }
}

pub fn absorption_monotone(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "absorption_monotone";
    match absorbed_pulse_run(s, None) {
        Ok((dt, rec)) => {
            let h0 = rec.energy[0].total();
            let per = ((2.0 * std::f64::consts::PI / (10.0 * dt)).round() as usize).max(1);
            let start = rec.times.iter().position(|&t| t > 5.0).unwrap_or(0);
            let peaks: Vec<f64> = rec.energy[start..].chunks(per).map(|c| c.iter().map(|e| e.field()).fold(0.0, f64::max)).collect();
            let rise = peaks.windows(2).map(|w| (w[1] - w[0]) / h0).fold(0.0, f64::max);
            CheckResult::judge(name, rise, tol.absorption_ripple, Comparison::AtMost, "largest per-period rise of EM energy".into())
        }
        Err(e) => CheckResult::failed(name, tol.absorption_ripple, Comparison::AtMost, e),
    }
}

pub fn slab_transmission(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "slab_transmission";
    let run = || -> Result<Vec<crate::tdsim::TransmissionPoint>, crate::tdsim::TdError> {
        let stack = LayerStack::slab(MaterialModel::vacuum(), MaterialModel::electric(&[(1.0, 1.0, 0.5)]).expect("valid"), 0.5)?;
        let opts = TransmissionOptions {
            reservoir: ReservoirOptions {
                n_omega: s.emergent_fine,
                ..Default::default()
            },
            ..Default::default()
        };
        transmission_spectrum(&stack, &s.transmission_frequencies, &opts, &natural())
    };
    match run() {
        Ok(pts) => {
            let worst = pts.iter().map(|p| (p.simulated / p.reference - 1.0).abs()).fold(0.0, f64::max);
            CheckResult::judge(name, worst, tol.transmission, Comparison::AtMost, format!("N_ω={}, {} frequencies", s.emergent_fine, pts.len()))
        }
        Err(e) => CheckResult::failed(name, tol.transmission, Comparison::AtMost, e),
    }
}

fn fdt_stacks() -> Vec<(&'static str, LayerStack)> {
    let slab = |m| LayerStack::slab(MaterialModel::vacuum(), m, 1.0).expect("valid");
    vec![
        ("ε-only", slab(single_lorentz())),
        ("μ-only", slab(MaterialModel::magnetic(&[(1.0, 1.0, 0.1)]).expect("valid"))),
        ("combined", slab(magnetodielectric())),
    ]
}

fn fdt_residual(stack: &LayerStack, h: f64) -> Result<f64, crate::green1d::GreenError> {
    let u = natural();
    let grid = Grid1D::covering(stack, h, 0.5)?;
    let (bundle, green) = mode_fe(stack, 1.0, &grid, &u)?;
    Ok(fdt_relative_residual(&fdt_identity_check(&bundle, &green, ExteriorFlux::Continuum), &green))
}

fn fdt_table(s: &SuiteSettings) -> Result<Vec<(&'static str, Vec<f64>)>, crate::green1d::GreenError> {
    fdt_stacks()
        .into_iter()
        .map(|(n, st)| Ok((n, s.fdt_steps.iter().map(|&h| fdt_residual(&st, h)).collect::<Result<Vec<f64>, _>>()?)))
        .collect()
}

pub fn fdt_identity(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "fdt_identity";
    let finest = *s.fdt_steps.last().unwrap_or(&0.0025);
    let run = || -> Result<Vec<(&str, f64)>, crate::green1d::GreenError> { fdt_stacks().into_iter().map(|(n, st)| Ok((n, fdt_residual(&st, finest)?))).collect() };
    match run() {
        Ok(r) => {
            let worst = r.iter().map(|x| x.1).fold(0.0, f64::max);
            let detail = format!("h={finest}: {}", r.iter().map(|(n, v)| format!("{n} {v:.2e}")).collect::<Vec<_>>().join(", "));
            CheckResult::judge(name, worst, tol.fdt, Comparison::AtMost, detail)
        }
        Err(e) => CheckResult::failed(name, tol.fdt, Comparison::AtMost, e),
    }
}

pub fn fdt_refinement_order(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "fdt_refinement_order";
    let cmp = Comparison::Near { target: 2 };
    match fdt_table(s) {
        Ok(t) => {
            let mut worst = 2.0;
            let mut parts = Vec::new();
            for (n, r) in t {
                for w in r.windows(2) {
                    let p = order(w[0], w[1]);
                    if (p - 2.0f64).abs() > (worst - 2.0f64).abs() {
                        worst = p;
                    }
                    parts.push(format!("{n} {p:.3}"));
                }
            }
            CheckResult::judge(name, worst, tol.fdt_order_band, cmp, parts.join(", "))
        }
        Err(e) => CheckResult::failed(name, tol.fdt_order_band, cmp, e),
    }
}

pub fn hcon_and_mode_equation(_: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "hcon_and_mode_equation";
    let run = || -> Result<(f64, f64), crate::green1d::GreenError> {
        let stack = LayerStack::slab(MaterialModel::vacuum(), magnetodielectric(), 1.0)?;
        let grid = Grid1D::covering(&stack, 0.02, 0.3)?;
        let (mut hcon, mut mode): (f64, f64) = (0.0, 0.0);
        for w in [0.3, 1.0, 2.5] {
            let (b, g) = mode_fe(&stack, w, &grid, &natural())?;
            hcon = hcon.max(hcon_residual(&b));
            mode = mode.max(mode_equation_residual(&b, &g.operator));
        }
        Ok((hcon, mode))
    };
    match run() {
        Ok((hcon, mode)) => {
            // the larger of the two residuals, each in units of its own tolerance
            let value = (hcon / tol.hcon).max(mode / tol.mode_equation);
            CheckResult::judge(name, value, 1.0, Comparison::AtMost, format!("hcon {hcon:.2e} (≤ {:.0e}), mode equation {mode:.2e} (≤ {:.0e})", tol.hcon, tol.mode_equation))
        }
        Err(e) => CheckResult::failed(name, 1.0, Comparison::AtMost, e),
    }
}

pub fn charge_conservation(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "charge_conservation";
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(1));
    let mut worst: f64 = 0.0;
    for _ in 0..s.charge_samples {
        let n = rng.random_range(3..60);
        let amps: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let k = charge_kernels(&amps, rng.random_range(0.01..10.0), rng.random_range(1e-3..1.0));
        worst = worst.max(charge_conservation_residual(&k));
    }
    for _ in 0..s.charge_samples / 5 {
        let m = MaterialModel::electric(&[(rng.random_range(0.1..3.0), rng.random_range(0.2..3.0), rng.random_range(0.01..1.0))]).expect("valid");
        let r = LayerStack::slab(MaterialModel::vacuum(), m, rng.random_range(0.2..2.0))
            .and_then(|st| Ok((Grid1D::covering(&st, 0.05, 0.2)?, st)))
            .and_then(|(g, st)| DiscreteOperator::assemble(&st, &g, rng.random_range(0.1..4.0), &natural()));
        match r {
            Ok(op) => worst = worst.max(charge_conservation_check(&op, &natural())),
            Err(e) => return CheckResult::failed(name, tol.charge, Comparison::AtMost, e),
        }
    }
    CheckResult::judge(name, worst, tol.charge, Comparison::AtMost, format!("{} random profiles", s.charge_samples + s.charge_samples / 5))
}

pub fn free_current_continuity(s: &SuiteSettings, tol: &Tolerances) -> CheckResult {
    let name = "free_current_continuity";
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(2));
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let m = MaterialModel::new(vec![pole(rng.random_range(0.2..1.5), 1.0, 0.2)], vec![pole(0.5, 1.3, 0.3)]).expect("valid");
        let boundary = if k % 2 == 0 { Boundary::Closed } else { Boundary::Periodic };
        let r = LayerStack::slab(MaterialModel::vacuum(), m, rng.random_range(0.3..2.0)).map_err(Into::into).and_then(|st| {
            let (_, d) = st.extent();
            let grid = Grid1D::spanning(-1.0, d + 1.0, 0.1)?;
            Simulation::from_stack(&st, grid, boundary, &ReservoirOptions { n_omega: 24, ..Default::default() }, natural(), None)
        });
        let sim = match r {
            Ok(sim) => sim,
            Err(e) => return CheckResult::failed(name, tol.continuity, Comparison::AtMost, e),
        };
        let mut a = SourceAmplitudes::zeros(&sim);
        for v in a.longitudinal.iter_mut().chain(a.transverse.iter_mut()).chain(a.magnetic.iter_mut()) {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        match free_current_from_amplitudes(&sim, &a, rng.random_range(0.0..50.0)) {
            Ok(f) => worst = worst.max(continuity_residual(&sim, &f)),
            Err(e) => return CheckResult::failed(name, tol.continuity, Comparison::AtMost, e),
        }
    }
    CheckResult::judge(name, worst, tol.continuity, Comparison::AtMost, "10 random reservoir states".into())
}

/// Smallest eigenvalue of the unit-diagonal magnetic energy block of a
/// strongly magnetic slab. Logged for the record; not a pass/fail check.
pub fn energy_form_eigenvalue(_: &SuiteSettings, _: &Tolerances) -> CheckResult {
    let name = "energy_form_min_eigenvalue";
    let run = || -> Result<f64, crate::tdsim::TdError> {
        let stack = LayerStack::slab(MaterialModel::vacuum(), MaterialModel::magnetic(&[(1.5, 1.0, 0.2)]).expect("valid"), 1.0)?;
        let grid = Grid1D::spanning(-2.0, 3.0, 0.1)?;
        let r = ReservoirDiscretization::build(&stack, &grid, Boundary::Closed, &ReservoirOptions::default(), &natural())?;
        Ok(r.min_energy_eigenvalue(&natural()))
    };
    match run() {
        Ok(v) => CheckResult::judge(name, v, 0.0, Comparison::Info, "magnetic slab ω_p=1.5, ω_T=1".into()),
        Err(e) => CheckResult::failed(name, 0.0, Comparison::Info, e),
    }
}
