//! Command-line surface. Every parsed invocation is logged to stderr as JSON
//! before any work starts, defaults included.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "warpsat", version, about = "Random K-SAT: planted instances, Warning Propagation, cavity predictions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Write a random instance in DIMACS CNF.
    Gen(GenArgs),
    /// Decide a DIMACS instance with WP; exits 10 on SAT, 20 on UNSAT.
    Solve(SolveArgs),
    /// Replica-symmetric predictions at (K, alpha, nu).
    Theory(TheoryArgs),
    /// Experiments.
    Exp(ExpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Uniform,
    Planted,
    /// Planted with `E` clauses violated by the root.
    PlantedE,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Variables.
    #[arg(short = 'n', long = "vars")]
    pub n_vars: usize,
    /// Clauses.
    #[arg(short = 'm', long = "clauses")]
    pub n_clauses: usize,
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    /// Planted energy (planted-e only).
    #[arg(short = 'E', long = "energy")]
    pub energy: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleArg {
    #[default]
    Sync,
    RandomAsync,
}

/// WP and decision parameters shared by `solve` and `exp finite-energy`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct WpArgs {
    /// WP sweep limit [default: max(10, ceil(2 ln N))].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Extra attempts with fresh seeds after a failed one.
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Sync)]
    pub schedule: ScheduleArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// DIMACS file, `-` for standard input.
    pub file: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub wp: WpArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct TheoryArgs {
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    /// Clause ratio; a comma-separated list gives one point per value.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    /// Chemical potential; absent means the satisfiable limit.
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file. CSV rows are appended, with a header only for a new
    /// or empty file.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpArgs {
    /// Worker threads [default: all cores].
    #[arg(long, env = "WARPSAT_JOBS", global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub which: ExpCommand,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExpCommand {
    /// WP on energy-planted instances, one record per E.
    FiniteEnergy(FiniteEnergyArgs),
    /// Histogram of root fields against the planted prediction.
    Fields(EnsembleArgs),
    /// Occurrence bias split by root value.
    Bias(EnsembleArgs),
    /// WP against exhaustive enumeration on small instances.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FiniteEnergyArgs {
    #[arg(short = 'n', long = "vars", default_value_t = 200)]
    pub n_vars: usize,
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Planted energies.
    #[arg(long = "energies", value_delimiter = ',', default_value = "0,5,10,15,20,30,50,60")]
    pub e_list: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub wp: WpArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// With JSON output, include every trial.
    #[arg(long)]
    pub verbose: bool,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    #[arg(short = 'n', long = "vars", default_value_t = 2000)]
    pub n_vars: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// SAT-conditioned formulas for the exact-field summary (0 skips it).
    #[arg(long, default_value_t = 20)]
    pub sat_samples: usize,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}
