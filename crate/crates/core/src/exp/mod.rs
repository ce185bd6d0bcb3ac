//! Experiments: the finite-energy WP sweep and theory-vs-sample comparisons.
//!
//! Every function is deterministic in its configuration. Per-trial work runs
//! on the rayon pool, results are collected in trial order and reduced
//! sequentially, so aggregates do not depend on the number of threads.
//! Wall-clock times in per-trial records are the only exception.

mod ensemble;
mod sweep;
mod validate;

pub use ensemble::{bias_statistics, field_statistics, BiasStats, EnsembleConfig, FieldBin, FieldStats};
pub use sweep::{finite_energy_sweep, finite_energy_sweep_runs, SweepConfig, SweepRecord, TrialRun, DEFAULT_E_LIST};
pub use validate::{
    constructiveness, oracle_validation, oracle_validation_with, ConstructivenessConfig, ConstructivenessReport,
    SatFieldSummary, ValidationConfig, ValidationReport, Violation, ViolationKind,
};

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::generators::GenError;
use crate::oracle::OracleError;
use crate::theory::TheoryError;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// `None` for an empty sample. A single observation has infinite SE.
    pub fn of(xs: &[f64]) -> Option<Estimate> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n < 2 {
            f64::INFINITY
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Some(Estimate { mean, se, n })
    }

    /// Binomial proportion with SE `sqrt(p (1 - p) / n)`.
    pub fn proportion(hits: usize, n: usize) -> Estimate {
        let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        Estimate {
            mean: p,
            se: if n == 0 { f64::INFINITY } else { (p * (1.0 - p) / n as f64).sqrt() },
            n,
        }
    }

    pub fn lo(&self, sigmas: f64) -> f64 {
        self.mean - sigmas * self.se
    }

    pub fn hi(&self, sigmas: f64) -> f64 {
        self.mean + sigmas * self.se
    }

    /// Whether `[mean - s*se, mean + s*se]` meets `[lo, hi]`.
    pub fn overlaps(&self, lo: f64, hi: f64, sigmas: f64) -> bool {
        self.hi(sigmas) >= lo && self.lo(sigmas) <= hi
    }

    /// Whether `target` lies within `s` standard errors.
    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.se
    }
}

/// One CSV row per element, with a header.
pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<(), ExpError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<(), ExpError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
