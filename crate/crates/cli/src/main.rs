//! `stres`: experiment driver. Exit codes: 0 pass, 1 invariant failure, 2 usage.

mod commands;
mod config;
mod manifest;
mod selftest;

use clap::{Parser, Subcommand};
use config::{parse_sweep, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "stres", version, about = "Space-time resonance experiments for the 2D quadratic Schroedinger equation")]
struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the random corpora; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// KEY=V1,V2,...: one run per value, each in OUT/KEY=VALUE. A bare key
    /// addresses the [run] table.
    #[arg(long, global = true)]
    sweep: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Resonant-set point clouds for the configured phases and the null-identity report.
    Resonance,
    /// Invariant battery over all modules at desk sizes.
    Selftest,
    /// Integrate the configured run: diagnostics CSV and profile snapshots.
    Evolve,
    /// Normal-form decomposition of the configured run: norm-report CSV.
    Normalform,
    /// Every CSV the report layer reads.
    ReportData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Resonance => "resonance",
            Command::Selftest => "selftest",
            Command::Evolve => "evolve",
            Command::Normalform => "normalform",
            Command::ReportData => "report-data",
        }
    }
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invariant(_) => 1,
        }
    }
}

impl From<stres_core::Error> for Failure {
    fn from(e: stres_core::Error) -> Self {
        match e {
            stres_core::Error::Config(_) | stres_core::Error::UnsupportedPhase(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("stres: usage: {m}"),
                Failure::Invariant(m) => eprintln!("stres: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut overrides = Vec::new();
    if let Some(seed) = cli.seed {
        overrides.push(("seed".to_string(), toml::Value::Integer(seed as i64)));
    }
    let Some(sweep) = &cli.sweep else {
        let cfg = RunConfig::load(cli.config.as_deref(), &overrides).map_err(Failure::Usage)?;
        return commands::dispatch(cli.command, &cfg, &cli.out);
    };
    let (key, values) = parse_sweep(sweep).map_err(Failure::Usage)?;
    let mut first_err = None;
    for v in values {
        let mut o = overrides.clone();
        o.push((key.clone(), v.clone()));
        let cfg = RunConfig::load(cli.config.as_deref(), &o).map_err(Failure::Usage)?;
        let dir = cli.out.join(format!("{key}={}", sweep_label(&v)));
        if let Err(e) = commands::dispatch(cli.command, &cfg, &dir) {
            eprintln!("stres: sweep {key}={}: {e:?}", sweep_label(&v));
            first_err.get_or_insert(e);
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn sweep_label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string().replace([' ', '[', ']'], "").replace(',', "_"),
    }
}
