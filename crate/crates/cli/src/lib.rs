//! `drig`: sample, simulate, analyze and verify intersection-graph models from
//! JSON configs, writing reproducible artifacts with a checksummed manifest.
//!
//! Exit codes: 0 ok, 1 usage, 2 config or I/O, 3 numeric or guard failure
//! (including a verification that does not pass).

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

pub use manifest::{Artifact, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "drig", version, about = "Dynamic random intersection graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw graphs in the configured mode and summarize group counts and degrees.
    Sample(RunArgs),
    /// Run the ON/OFF dynamics and write the event log.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated list of n values; one summary row per value.
        #[arg(long)]
        sweep: Option<List<usize>>,
    },
    /// Compare replicas with limit laws.
    Analyze {
        kind: AnalyzeKind,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated time points (marks: candidate s1/s2 values).
        #[arg(long)]
        grid: Option<List<f64>>,
        /// Ball radius for `local`.
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Roots and limit samples per replica for `local`.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Exhaustive and closed-form checks; writes a pass/fail JSON report.
    Verify {
        kind: VerifyKind,
        #[arg(long)]
        out: PathBuf,
        /// Model for `equivalence-bound`; defaults to p_2 = 1, W = 1, t = 1.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicas: u64,
    /// Worker threads; 0 or absent uses every core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeKind {
    Degrees,
    Giant,
    Kmax,
    Marks,
    Local,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    BcmLaw,
    BcmUniform,
    BgrgUniform,
    Bridge,
    EquivalenceBound,
}

impl fmt::Display for AnalyzeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl fmt::Display for VerifyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Comma-separated values, e.g. `--grid 0,0.5,1,inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<T>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<drig_core::Error> for CliError {
    fn from(e: drig_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(run) => commands::sample(&run),
        Command::Simulate { run, sweep } => commands::simulate(&run, sweep.as_ref().map(|l| l.0.as_slice())),
        Command::Analyze { kind, run, grid, radius, samples } => {
            commands::analyze(kind, &run, grid.as_ref().map(|l| l.0.as_slice()), radius, samples)
        }
        Command::Verify { kind, out, config } => commands::verify(kind, &out, config.as_deref()),
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drig: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
