use anyhow::{bail, Result};
use maxqed::green1d::{solve_green_column, DiscreteOperator};
use maxqed::materials::{kk_reconstruct, KkOptions};
use maxqed::pvquad::PoleIdentity;
use maxqed::tdsim::{init_pulse, Probes, PulseSpec, ReservoirOptions, Simulation, TdError};
use maxqed::verify::{run_suite, VerifyReport};
use maxqed::{UnitsKind, UnitsSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

use crate::config::RunConfig;
use crate::output::CsvOut;

/// Everything a command needs after argument and config handling.
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub units: UnitsSystem,
}

impl Context {
    fn comment(&self, command: &str) -> String {
        format!("maxqed {command} config_sha256={} units={}", self.config.hash(), units_name(self.config.units))
    }

    fn csv(&self, command: &str, name: &str, header: &[&str]) -> Result<CsvOut> {
        std::fs::create_dir_all(&self.out)?;
        CsvOut::create(&self.out, name, &self.comment(command), header)
    }
}

fn units_name(u: UnitsKind) -> &'static str {
    match u {
        UnitsKind::Natural => "natural",
        UnitsKind::Si => "si",
    }
}

/// Exit code for `failed` failed checks: `0` when none, `1 + failed` otherwise.
pub fn failure_code(failed: usize) -> u8 {
    if failed == 0 {
        0
    } else {
        (1 + failed).min(255) as u8
    }
}

pub fn kk_check(ctx: &Context) -> Result<u8> {
    let m = ctx.config.material()?;
    let grid = m.kk_grid(ctx.config.suite.kk_panels)?;
    let im = grid.sample(|w| m.epsilon(w).im);
    let opts = KkOptions::default();
    let rows: Vec<[f64; 4]> = ctx
        .config
        .sweep
        .points()
        .par_iter()
        .map(|&w| {
            let exact = m.epsilon(w).re - 1.0;
            let v = kk_reconstruct(&grid, &im, w, &opts)?;
            Ok([w, exact, v, (v - exact).abs()])
        })
        .collect::<Result<_, maxqed::materials::MaterialError>>()?;
    let mut csv = ctx.csv("kk-check", "kk_check.csv", &["omega", "re_closed_form", "re_reconstructed", "abs_err"])?;
    for r in &rows {
        csv.numbers(r)?;
    }
    let path = csv.finish()?;
    let err = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let scale = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    let rel = if scale > 0.0 { err / scale } else { err };
    let tol = ctx.config.tolerances.kk_relative;
    println!("kk-check: max relative error {rel:.3e} (tolerance {tol:.1e}) over {} points -> {}", rows.len(), path.display());
    if rel <= tol {
        Ok(0)
    } else {
        eprintln!("kk-check: tolerance breached ({rel:.3e} > {tol:.1e})");
        Ok(failure_code(1))
    }
}

pub fn green(ctx: &Context) -> Result<u8> {
    let stack = ctx.config.stack()?;
    let grid = ctx.config.grid.build(&stack)?;
    let (lo, _) = stack.extent();
    let z0 = ctx.config.grid.source.unwrap_or(lo - 0.5 * ctx.config.grid.margin);
    if z0 < grid.start() || z0 > grid.end() {
        bail!("source position {z0} lies outside the grid [{}, {}]", grid.start(), grid.end());
    }
    let src = grid.nearest(z0);
    let units = ctx.units;
    let columns = ctx
        .config
        .sweep
        .points()
        .par_iter()
        .map(|&w| {
            let op = DiscreteOperator::assemble(&stack, &grid, w, &units)?;
            let (col, res) = solve_green_column(&op, src)?;
            log::info!("ω = {w}: column residual {res:.2e}");
            Ok((w, col))
        })
        .collect::<Result<Vec<_>, maxqed::green1d::GreenError>>()?;
    let mut csv = ctx.csv("green", "green.csv", &["omega", "z", "z_source", "re_g", "im_g"])?;
    for (w, col) in &columns {
        for (i, g) in col.iter().enumerate() {
            csv.numbers(&[*w, grid.node(i), grid.node(src), g.re, g.im])?;
        }
    }
    let path = csv.finish()?;
    println!("green: {} frequencies × {} nodes -> {}", columns.len(), grid.len(), path.display());
    Ok(0)
}

pub fn simulate(ctx: &Context) -> Result<u8> {
    let cfg = &ctx.config.simulate;
    let stack = ctx.config.stack()?;
    let grid = ctx.config.grid.build(&stack)?;
    let opts = ReservoirOptions {
        n_omega: cfg.n_omega,
        ..Default::default()
    };
    let mut sim = Simulation::from_stack(&stack, grid, cfg.boundary(), &opts, ctx.units, cfg.dt)?;
    if !sim.reservoir.is_empty() {
        let horizon = sim.reservoir.recurrence_horizon();
        log::info!("recurrence horizon {horizon:.2}, run length {:.2}", cfg.duration);
        if cfg.duration > horizon {
            return Err(TdError::BeyondRecurrence {
                duration: cfg.duration,
                horizon,
            }
            .into());
        }
    }
    let p = &cfg.pulse;
    let spec = PulseSpec {
        center: p.center,
        width: p.width,
        carrier: p.carrier,
        amplitude: p.amplitude,
        direction: p.direction,
    };
    let mut state = init_pulse(&sim, &stack, &spec)?;
    let steps = (cfg.duration / sim.dt).ceil() as usize;
    let rec = sim.run(&mut state, steps, cfg.every.max(1), &Probes::default())?;
    let mut csv = ctx.csv("simulate", "timeseries.csv", &["t", "em_energy", "reservoir_energy", "interaction_energy", "total_energy"])?;
    for (t, e) in rec.times.iter().zip(&rec.energy) {
        csv.numbers(&[*t, e.field(), e.reservoir, e.interaction, e.total()])?;
    }
    let series = csv.finish()?;
    let mut csv = ctx.csv("simulate", "fields.csv", &["field", "z", "value"])?;
    for (i, e) in state.e.iter().enumerate() {
        csv.row(["E".to_string(), format!("{:.10e}", grid.node(i)), format!("{e:.10e}")])?;
    }
    for (c, b) in state.b.iter().enumerate() {
        csv.row(["B".to_string(), format!("{:.10e}", grid.cell_center(c)), format!("{b:.10e}")])?;
    }
    csv.finish()?;
    println!(
        "simulate: {steps} steps of dt = {:.4e}, relative energy drift {:.3e} -> {}",
        sim.dt,
        rec.energy_drift(),
        series.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct Summary<'a> {
    config_sha256: String,
    units: &'static str,
    total: usize,
    failed: usize,
    seconds: f64,
    checks: &'a [maxqed::verify::CheckResult],
}

pub fn verify(ctx: &Context) -> Result<u8> {
    if ctx.config.units != UnitsKind::Natural {
        log::warn!("the verification suite always runs in natural units");
    }
    let report: VerifyReport = run_suite(&ctx.config.suite, &ctx.config.tolerances);
    let mut csv = ctx.csv("verify", "verify.csv", &["check", "passed", "value", "tolerance", "comparison", "seconds", "detail"])?;
    for c in &report.checks {
        println!("{}", c.line());
        let cmp = serde_json::to_value(c.comparison)?;
        csv.row([
            c.name.clone(),
            c.passed.to_string(),
            format!("{:.6e}", c.value),
            format!("{:.6e}", c.tolerance),
            cmp.to_string().trim_matches('"').to_string(),
            format!("{:.3}", c.seconds),
            c.detail.clone(),
        ])?;
    }
    let path = csv.finish()?;
    let summary = Summary {
        config_sha256: ctx.config.hash(),
        units: "natural",
        total: report.checks.len(),
        failed: report.failed,
        seconds: report.seconds,
        checks: &report.checks,
    };
    let json = ctx.out.join("verify_summary.json");
    std::fs::write(&json, serde_json::to_string_pretty(&summary)?)?;
    println!(
        "verify: {} checks, {} failed, {:.1} s -> {}, {}",
        report.checks.len(),
        report.failed,
        report.seconds,
        path.display(),
        json.display()
    );
    Ok(failure_code(report.failed))
}

pub fn verify_identities(ctx: &Context) -> Result<u8> {
    let s = &ctx.config.suite;
    let tol = ctx.config.tolerances.pole_identity;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut csv = ctx.csv("verify-identities", "identities.csv", &["identity", "omega", "omega_prime", "omega_second", "eta", "residual"])?;
    let mut worst = [0.0f64; PoleIdentity::ALL.len()];
    for _ in 0..s.identity_samples {
        let (w, wp, wpp): (f64, f64, f64) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        for &eta in &s.identity_etas {
            for (k, id) in PoleIdentity::ALL.iter().enumerate() {
                if id.divides_by_difference() && (w - wp).abs() < s.identity_floor {
                    continue;
                }
                let r = id.residual(w, wp, wpp, eta).norm();
                worst[k] = worst[k].max(r);
                csv.row([
                    id.name().to_string(),
                    format!("{w:.10e}"),
                    format!("{wp:.10e}"),
                    format!("{wpp:.10e}"),
                    format!("{eta:.3e}"),
                    format!("{r:.6e}"),
                ])?;
            }
        }
    }
    let path = csv.finish()?;
    let mut failed = 0;
    for (id, w) in PoleIdentity::ALL.iter().zip(worst) {
        let ok = w <= tol;
        failed += usize::from(!ok);
        println!("{} {:<6} max residual {w:.3e} (tolerance {tol:.1e})", if ok { "PASS" } else { "FAIL" }, id.name());
    }
    println!("verify-identities -> {}", path.display());
    Ok(failure_code(failed))
}
