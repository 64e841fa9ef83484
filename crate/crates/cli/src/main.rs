//! Batch front-end: reads a TOML run config, runs one subcommand and writes
//! CSV tables plus `manifest.json` to the output directory.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid config, 3 numeric
//! failure, 4 warnings under `--strict`.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use giant_atoms::Error;

use crate::config::RunConfig;
use crate::output::{write_manifest, write_tables, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    /// Core errors raised while building inputs are config errors.
    pub fn from_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidLayout(_) | Error::Unsupported(_) | Error::OutsideBand { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "giant-atoms", version, about = "Giant atoms in a coupled-cavity array")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run config; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Exit with status 4 when any tolerance is not met.
    #[arg(long, global = true)]
    strict: bool,

    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "GIANT_ATOMS_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Eigenvalues against the coupling.
    Spectrum,
    /// Markov decay rate and pole markers against the detuning.
    DecayRate,
    /// Split-step dynamics with an optional resolvent overlay.
    Evolve,
    /// Self-energies along a line in the complex plane.
    SelfenergyScan,
    /// Poles and residues of the layout.
    Poles,
    /// Ratio and transfer of braided pairs over distance and detuning.
    DfiScan,
    /// Giant against small atoms in the gap and at in-band DFI points.
    Compare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::DecayRate => "decay-rate",
            Command::Evolve => "evolve",
            Command::SelfenergyScan => "selfenergy-scan",
            Command::Poles => "poles",
            Command::DfiScan => "dfi-scan",
            Command::Compare => "compare",
        }
    }

    fn run(self, config: &RunConfig) -> Result<commands::Outcome, CliError> {
        match self {
            Command::Spectrum => commands::spectrum(config),
            Command::DecayRate => commands::decay_rate(config),
            Command::Evolve => commands::evolve(config),
            Command::SelfenergyScan => commands::selfenergy_scan(config),
            Command::Poles => commands::poles(config),
            Command::DfiScan => commands::dfi(config),
            Command::Compare => commands::compare(config),
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let start = Instant::now();
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let outcome = cli.command.run(&config)?;
    let artifacts = write_tables(&cli.out, &outcome.tables)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        config: &config,
        derived: &outcome.derived,
        artifacts,
        warnings: outcome.warnings.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&cli.out, &manifest)?;
    Ok(outcome.warnings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if cli.strict && !warnings.is_empty() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
