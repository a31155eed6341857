//! `zerotemp`: experiments over discrete-spectrum thermodynamics, driven by
//! a versioned JSON config.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical error,
//! 3 counterexample found by the equivalence suite.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Core(zerotemp::Error),
    Counterexamples(usize),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Counterexamples(n) => write!(f, "{n} counterexample(s) found"),
        }
    }
}

impl From<zerotemp::Error> for CliError {
    fn from(e: zerotemp::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Core(e) => match e {
                zerotemp::Error::NumericsFailed { .. }
                | zerotemp::Error::TruncationCapExceeded { .. } => 2,
                _ => 1,
            },
            CliError::Counterexamples(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "zerotemp",
    version,
    about = "Discrete-spectrum thermodynamics experiments"
)]
struct Cli {
    /// Experiment configuration (JSON, schema 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/report files (default: config `output`, then
    /// the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the stdout summary; files are still written.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Z, populations, entropy (direct and via the specific-heat
    /// integral), and C over a temperature grid.
    ThermoTable,
    /// Run the alternating isothermal/adiabatic cooling staircase between
    /// two entropy surfaces.
    Staircase,
    /// Solve for the start temperature from which an adiabat ends at zero.
    B2Solve,
    /// Sample seeded projective energy measurements of a Gibbs state.
    MeasureEnsemble,
    /// Randomized check that matching zero-temperature entropies and the
    /// absence of an adiabatic route to zero always occur together.
    EquivalenceSuite,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let config = config::load(config_path)?;

    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::Validation(format!(
            "cannot create output dir {}: {e}",
            out_dir.display()
        ))
    })?;

    let seed = || -> Result<u64, CliError> {
        cli.seed.or(config.seed).ok_or_else(|| {
            CliError::Validation(
                "a seed is required (config `seed` or --seed) for stochastic subcommands".into(),
            )
        })
    };

    let missing = |name: &str| {
        CliError::Validation(format!(
            "config has no `{name}` section for this subcommand"
        ))
    };
    match cli.command {
        Command::ThermoTable => {
            let cfg = config
                .thermo_table
                .as_ref()
                .ok_or_else(|| missing("thermo_table"))?;
            commands::thermo_table(cfg, &out_dir, cli.quiet)
        }
        Command::Staircase => {
            let cfg = config
                .staircase
                .as_ref()
                .ok_or_else(|| missing("staircase"))?;
            commands::staircase_cmd(cfg, &out_dir, cli.quiet)
        }
        Command::B2Solve => {
            let cfg = config
                .b2_solve
                .as_ref()
                .ok_or_else(|| missing("b2_solve"))?;
            commands::b2_solve_cmd(cfg, &out_dir, cli.quiet)
        }
        Command::MeasureEnsemble => {
            let cfg = config
                .measure_ensemble
                .as_ref()
                .ok_or_else(|| missing("measure_ensemble"))?;
            commands::measure_ensemble_cmd(cfg, seed()?, &out_dir, cli.quiet)
        }
        Command::EquivalenceSuite => {
            let cfg = config
                .equivalence_suite
                .as_ref()
                .ok_or_else(|| missing("equivalence_suite"))?;
            commands::equivalence_suite_cmd(cfg, seed()?, &out_dir, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
