#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use anyhow::{bail, Context as _, Result};
use clap::{ArgAction, Parser, Subcommand};
use maxqed::UnitsKind;
use std::path::PathBuf;
use std::process::ExitCode;

use commands::Context;
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "maxqed", version, about = "Verification and simulation workflows for dispersive, absorbing media")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory. MAXQED_OUT takes precedence.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_units)]
    units: Option<UnitsKind>,
    /// Worker threads for frequency sweeps and the check suite.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Override one tolerance, e.g. `--tol-override fdt=2e-6`. Repeatable.
    #[arg(long = "tol-override", global = true, value_name = "KEY=VAL")]
    tol_override: Vec<String>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Kramers–Kronig reconstruction of the material over the sweep.
    KkCheck,
    /// Green-function slices of the layer stack over the sweep.
    Green,
    /// Time-domain pulse run through the layer stack.
    Simulate,
    /// The full invariant suite, with a pass/fail table.
    Verify,
    /// Residual tables of the pole-product identities.
    VerifyIdentities,
}

fn parse_units(s: &str) -> Result<UnitsKind, String> {
    s.parse::<UnitsKind>().map_err(|e| e.to_string())
}

fn parse_command(s: &str) -> Result<Command> {
    Ok(match s {
        "kk-check" => Command::KkCheck,
        "green" => Command::Green,
        "simulate" => Command::Simulate,
        "verify" => Command::Verify,
        "verify-identities" => Command::VerifyIdentities,
        other => bail!("unknown command '{other}' in config"),
    })
}

fn setup(cli: &Cli) -> Result<(Command, Context)> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let command = match (cli.command, config.command.as_deref()) {
        (Some(c), _) => c,
        (None, Some(c)) => parse_command(c)?,
        (None, None) => bail!("no command given (pass a subcommand or set \"command\" in the config)"),
    };
    if let Some(u) = cli.units {
        config.units = u;
    }
    for kv in &cli.tol_override {
        let (key, value) = kv.split_once('=').with_context(|| format!("--tol-override expects KEY=VAL, got '{kv}'"))?;
        let value: f64 = value.trim().parse().with_context(|| format!("tolerance value '{value}' is not a number"))?;
        config.tolerances.set(key.trim(), value).map_err(anyhow::Error::msg)?;
    }
    config.validate()?;
    let out = std::env::var_os("MAXQED_OUT")
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .or_else(|| config.out.as_ref().map(|o| config_relative(&config, o)))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let units = config.units.system();
    Ok((command, Context { config, out, units }))
}

fn config_relative(config: &RunConfig, p: &std::path::Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.base.join(p)
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let (command, ctx) = setup(cli)?;
    match command {
        Command::KkCheck => commands::kk_check(&ctx),
        Command::Green => commands::green(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::VerifyIdentities => commands::verify_identities(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
