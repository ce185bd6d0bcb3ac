//! `warpsat`: generation, solving, cavity predictions and experiments.
//!
//! Exit codes: 0 success, 1 failed check or internal error, 2 bad flags,
//! 3 I/O or input-format failure, 10 SAT, 20 UNSAT declared.

mod args;

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser};
use serde::Serialize;
use thiserror::Error;

use args::{Cli, Command, Dist, EnsembleArgs, ExpArgs, ExpCommand, FiniteEnergyArgs, Format, GenArgs, ScheduleArg, SolveArgs, TheoryArgs, ValidateArgs, WpArgs};
use warpsat::dimacs::{read_dimacs, write_dimacs};
use warpsat::exp::{self, EnsembleConfig, ExpError, SweepConfig, ValidationConfig};
use warpsat::generators::{generate, Distribution, GenConfig};
use warpsat::theory::{theory_point, SeriesControl, TheoryError, TheoryPoint, TheoryRow};
use warpsat::wp::{default_max_iters, wp_decide, DecideParams, Decision, Schedule, WpParams};
use warpsat::{energy, Assignment};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<ExpError> for CliError {
    fn from(e: ExpError) -> Self {
        match e {
            ExpError::Config(_) | ExpError::Gen(_) => CliError::Usage(e.to_string()),
            ExpError::Io(_) | ExpError::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Domain(_) | TheoryError::NonPositiveNu { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!(
        "warpsat: config {}",
        serde_json::to_string(&cli).expect("arguments serialize")
    );
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("warpsat: error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Gen(a) => single_threaded(|| gen(a)),
        Command::Solve(a) => single_threaded(|| solve(a)),
        Command::Theory(a) => single_threaded(|| theory(a)),
        Command::Exp(a) => experiment(a),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))
}

fn single_threaded(f: impl FnOnce() -> Result<u8, CliError> + Send) -> Result<u8, CliError> {
    pool(1)?.install(f)
}

/// Buffered file, or standard output.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path.unwrap_or(Path::new("<stdout>")), e))
}

fn write_json_to<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = sink(path)?;
    exp::write_json(&mut w, value)?;
    finish(w, path)
}

fn write_csv_to<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = sink(path)?;
    exp::write_csv(&mut w, rows)?;
    finish(w, path)
}

// ---------------------------------------------------------------------------

fn gen(a: GenArgs) -> Result<u8, CliError> {
    let distribution = match (a.dist, a.energy) {
        (Dist::PlantedE, Some(e)) => Distribution::PlantedEnergy(e),
        (Dist::PlantedE, None) => return Err(CliError::Usage("--dist planted-e requires -E".into())),
        (_, Some(_)) => return Err(CliError::Usage("-E is only valid with --dist planted-e".into())),
        (Dist::Uniform, None) => Distribution::Uniform,
        (Dist::Planted, None) => Distribution::Planted,
    };
    let cfg = GenConfig {
        n_vars: a.n_vars,
        k: a.k,
        n_clauses: a.n_clauses,
        seed: a.seed,
        distribution,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let inst = generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = write_dimacs(inst.formula(), &inst.dimacs_meta());
    let path = a.output.as_deref();
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())
        .map_err(|e| io_err(path.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, path)?;
    Ok(0)
}

// ---------------------------------------------------------------------------

fn decide_params(wp: &WpArgs) -> DecideParams {
    DecideParams {
        wp: WpParams {
            max_iters: wp.max_iters,
            schedule: match wp.schedule {
                ScheduleArg::Sync => Schedule::Sync,
                ScheduleArg::RandomAsync => Schedule::RandomAsync,
            },
        },
        restarts: wp.restarts,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    file: &'a Path,
    n_vars: usize,
    n_clauses: usize,
    k: usize,
    seed: u64,
    params: DecideParams,
    #[serde(flatten)]
    decision: &'a Decision,
    /// Present when the file records a root.
    agree_with_root: Option<f64>,
    wall_time_ms: f64,
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| io_err(Path::new("<stdin>"), e))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    }
    Ok(text)
}

fn solve(a: SolveArgs) -> Result<u8, CliError> {
    let text = read_input(&a.file)?;
    let file = read_dimacs(&text).map_err(|e| CliError::Io(format!("{}: {e}", a.file.display())))?;
    let f = &file.formula;
    let mut params = decide_params(&a.wp);
    params.wp.max_iters = Some(params.wp.max_iters.unwrap_or_else(|| default_max_iters(f.n_vars())));
    let start = Instant::now();
    let d = wp_decide(f, a.seed, &params);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    // never report SAT without a checked witness
    if let Some(w) = d.witness() {
        if energy(f, w).ok() != Some(0) {
            return Err(CliError::Failed("internal error: SAT witness does not satisfy the formula".into()));
        }
    }
    let root = file.meta.root.as_deref().map(Assignment::from_bools);
    let out = SolveOutput {
        file: &a.file,
        n_vars: f.n_vars(),
        n_clauses: f.n_clauses(),
        k: f.k(),
        seed: a.seed,
        params,
        decision: &d,
        agree_with_root: root.as_ref().and_then(|r| d.agreement_with(r)),
        wall_time_ms,
    };
    write_json_to(None, &out)?;
    Ok(if d.verdict.is_sat() { EXIT_SAT } else { EXIT_UNSAT })
}

// ---------------------------------------------------------------------------

fn theory(a: TheoryArgs) -> Result<u8, CliError> {
    let ctl = SeriesControl::default();
    let nus: Vec<Option<f64>> = if a.nu.is_empty() {
        vec![None]
    } else {
        a.nu.iter().copied().map(Some).collect()
    };
    let mut points: Vec<TheoryPoint> = Vec::new();
    for &alpha in &a.alpha {
        for &nu in &nus {
            points.push(theory_point(a.k, alpha, nu, &ctl)?);
        }
    }
    let path = a.output.as_deref();
    match a.format {
        Format::Json if points.len() == 1 => write_json_to(path, &points[0]),
        Format::Json => {
            #[derive(Serialize)]
            struct Points<'a> {
                points: &'a [TheoryPoint],
            }
            write_json_to(path, &Points { points: &points })
        }
        Format::Csv => {
            let rows: Vec<TheoryRow> = points.iter().map(TheoryRow::from).collect();
            match path {
                None => write_csv_to(None, &rows),
                Some(p) => append_csv(p, &rows),
            }
        }
    }?;
    Ok(0)
}

/// Appends rows; the header is written only when the file is new or empty.
fn append_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------

fn experiment(a: ExpArgs) -> Result<u8, CliError> {
    let threads = match a.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    pool(threads)?.install(|| match a.which {
        ExpCommand::FiniteEnergy(x) => finite_energy(x),
        ExpCommand::Fields(x) => fields(x),
        ExpCommand::Bias(x) => bias(x),
        ExpCommand::Validate(x) => validate(x),
    })
}

fn finite_energy(a: FiniteEnergyArgs) -> Result<u8, CliError> {
    let cfg = SweepConfig {
        n_vars: a.n_vars,
        k: a.k,
        alpha: a.alpha,
        e_list: a.e_list.clone(),
        trials: a.trials,
        seed: a.seed,
        decide: decide_params(&a.wp),
    };
    cfg.validate()?;
    let path = a.output.as_deref();
    match a.format {
        Format::Csv => write_csv_to(path, &exp::finite_energy_sweep(&cfg)?)?,
        Format::Json => {
            let (records, runs) = exp::finite_energy_sweep_runs(&cfg)?;
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a SweepConfig,
                records: Vec<exp::SweepRecord>,
                #[serde(skip_serializing_if = "Option::is_none")]
                runs: Option<Vec<exp::TrialRun>>,
            }
            let out = Out {
                config: &cfg,
                records,
                runs: a.verbose.then_some(runs),
            };
            write_json_to(path, &out)?
        }
    }
    Ok(0)
}

fn ensemble(a: &EnsembleArgs) -> EnsembleConfig {
    EnsembleConfig {
        k: a.k,
        alpha: a.alpha,
        n_vars: a.n_vars,
        instances: a.instances,
        seed: a.seed,
    }
}

fn fields(a: EnsembleArgs) -> Result<u8, CliError> {
    let s = exp::field_statistics(&ensemble(&a))?;
    let path = a.output.as_deref();
    match a.format {
        Format::Json => write_json_to(path, &s)?,
        Format::Csv => write_csv_to(path, &s.bins)?,
    }
    Ok(0)
}

fn bias(a: EnsembleArgs) -> Result<u8, CliError> {
    let b = exp::bias_statistics(&ensemble(&a))?;
    let path = a.output.as_deref();
    match a.format {
        Format::Json => write_json_to(path, &b)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                k: usize,
                alpha: f64,
                n_vars: usize,
                instances: usize,
                true_vars: usize,
                mean_true: f64,
                se_true: f64,
                false_vars: usize,
                mean_false: f64,
                se_false: f64,
                ratio_of_means_true: f64,
                theory: f64,
            }
            let row = Row {
                k: b.config.k,
                alpha: b.config.alpha,
                n_vars: b.config.n_vars,
                instances: b.config.instances,
                true_vars: b.true_vars,
                mean_true: b.mean_true,
                se_true: b.se_true,
                false_vars: b.false_vars,
                mean_false: b.mean_false,
                se_false: b.se_false,
                ratio_of_means_true: b.ratio_of_means_true,
                theory: b.theory,
            };
            write_csv_to(path, &[row])?
        }
    }
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<u8, CliError> {
    let r = exp::oracle_validation_with(&ValidationConfig {
        seed: a.seed,
        instances: a.instances,
        sat_samples: a.sat_samples,
        ..Default::default()
    })?;
    write_json_to(a.output.as_deref(), &r)?;
    if r.passed() {
        Ok(0)
    } else {
        eprintln!("warpsat: {} violations", r.violations.len());
        Ok(EXIT_FAILED)
    }
}
