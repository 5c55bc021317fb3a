//! `rydshape`: command-line runner for Rydberg mode-shaping simulations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod heatmap;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rydberg_shaping::protocol::ModeSet;

use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rydshape", version, about = "Rydberg mode shaping and parallel gates in long ion chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON scenario file; omitted keys take reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Mode set used by gate and mode commands (overrides the config).
    #[arg(long, global = true, value_parser = parse_mode_set)]
    mode_set: Option<ModeSet>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Axial equilibrium positions.
    Equilibrium,
    /// Transverse normal modes, localization and heatmap.
    Modes,
    /// Parallel-gate fidelity versus shape frequency ν.
    GateScan,
    /// ν-optimized fidelity versus start delay of the second gate.
    DelayScan,
    /// Microwave-dressed Rydberg excitation: π-pulse and adiabatic ramp.
    Dressing,
    /// All figure presets plus a summary of headline numbers.
    ReproducePaper,
}

fn parse_mode_set(s: &str) -> Result<ModeSet, String> {
    s.parse().map_err(|e: rydberg_shaping::Error| e.to_string())
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(set) = cli.mode_set {
        cfg.mode_set = set;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("rydshape-out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    dispatch(cli.command, &cfg, &out)?;
    Ok(out)
}

fn dispatch(command: Command, cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    match command {
        Command::Equilibrium => commands::equilibrium(cfg, out).map(drop),
        Command::Modes => commands::modes(cfg, out).map(drop),
        Command::GateScan => commands::gate_scan(cfg, out).map(drop),
        Command::DelayScan => commands::delay_scan(cfg, out).map(drop),
        Command::Dressing => commands::dressing(cfg, out).map(drop),
        Command::ReproducePaper => commands::reproduce_paper(cfg, out).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Validation(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.join("summary.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
