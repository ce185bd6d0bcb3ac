//! WP on energy-planted instances as a function of the planted energy `E`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{Estimate, ExpError};
use crate::generators::{gen_planted_energy, GenConfig};
use crate::rng::derive_path;
use crate::wp::{wp_decide, DecideParams, RunRecord};

pub const DEFAULT_E_LIST: [usize; 8] = [0, 5, 10, 15, 20, 30, 50, 60];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_vars: usize,
    pub k: usize,
    pub alpha: f64,
    pub e_list: Vec<usize>,
    /// Trials per `E`.
    pub trials: usize,
    pub seed: u64,
    pub decide: DecideParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_vars: 200,
            k: 3,
            alpha: 10.0,
            e_list: DEFAULT_E_LIST.to_vec(),
            trials: 100,
            seed: 0,
            decide: DecideParams::default(),
        }
    }
}

impl SweepConfig {
    pub fn n_clauses(&self) -> usize {
        GenConfig::clauses_for_ratio(self.n_vars, self.alpha)
    }

    fn gen_config(&self, e: usize, seed: u64) -> GenConfig {
        GenConfig::planted_energy(self.n_vars, self.k, self.n_clauses(), e, seed)
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        if self.trials == 0 {
            return Err(ExpError::Config("trials must be at least 1".into()));
        }
        if self.e_list.is_empty() {
            return Err(ExpError::Config("the list of energies is empty".into()));
        }
        for &e in &self.e_list {
            self.gen_config(e, 0).validate()?;
        }
        Ok(())
    }

    /// Instance and WP seeds of `(E, trial)`. Keyed by the value of `E`, so a
    /// record does not change when other energies are added to the list.
    pub fn trial_seeds(&self, e: usize, trial: usize) -> (u64, u64) {
        let (e, t) = (e as u64, trial as u64);
        (derive_path(self.seed, &[e, t, 0]), derive_path(self.seed, &[e, t, 1]))
    }
}

/// Aggregate over the trials at one `E`. Means marked "converged" are over
/// runs where WP reached a fixed point and are empty when there were none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(rename = "E")]
    pub energy: usize,
    pub trials: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    pub convergence_rate_se: f64,
    /// Converged.
    pub mean_iterations: Option<f64>,
    pub mean_iterations_se: Option<f64>,
    /// Converged.
    pub mean_unassigned: Option<f64>,
    pub mean_unassigned_se: Option<f64>,
    /// Converged runs that assigned at least one variable.
    pub mean_agree_with_root: Option<f64>,
    pub mean_agree_with_root_se: Option<f64>,
    /// `|final energy - E|`, converged.
    pub mean_final_energy_gap: Option<f64>,
    pub mean_final_energy_gap_se: Option<f64>,
    /// Converged runs whose completion has energy at most `E`.
    pub converged_within_e_rate: Option<f64>,
    /// All runs.
    pub mean_final_energy: f64,
    pub sat_rate: f64,
}

impl SweepRecord {
    fn from_runs(energy: usize, runs: &[RunRecord]) -> Self {
        let conv: Vec<&RunRecord> = runs.iter().filter(|r| r.converged).collect();
        let est = |xs: Vec<f64>| Estimate::of(&xs);
        let iters = est(conv.iter().map(|r| r.iterations as f64).collect());
        let unassigned = est(conv.iter().map(|r| r.unassigned as f64).collect());
        let agree = est(conv.iter().filter_map(|r| r.agree_with_root).collect());
        let gap = est(conv.iter().map(|r| (r.final_energy as f64 - energy as f64).abs()).collect());
        let rate = Estimate::proportion(conv.len(), runs.len());
        let within = (!conv.is_empty())
            .then(|| conv.iter().filter(|r| r.final_energy <= energy).count() as f64 / conv.len() as f64);
        let n = runs.len() as f64;
        SweepRecord {
            energy,
            trials: runs.len(),
            converged: conv.len(),
            convergence_rate: rate.mean,
            convergence_rate_se: rate.se,
            mean_iterations: iters.map(|e| e.mean),
            mean_iterations_se: iters.map(|e| e.se),
            mean_unassigned: unassigned.map(|e| e.mean),
            mean_unassigned_se: unassigned.map(|e| e.se),
            mean_agree_with_root: agree.map(|e| e.mean),
            mean_agree_with_root_se: agree.map(|e| e.se),
            mean_final_energy_gap: gap.map(|e| e.mean),
            mean_final_energy_gap_se: gap.map(|e| e.se),
            converged_within_e_rate: within,
            mean_final_energy: runs.iter().map(|r| r.final_energy as f64).sum::<f64>() / n,
            sat_rate: runs.iter().filter(|r| r.verdict == "SAT").count() as f64 / n,
        }
    }

    pub fn convergence(&self) -> Estimate {
        Estimate {
            mean: self.convergence_rate,
            se: self.convergence_rate_se,
            n: self.trials,
        }
    }

    fn pair(mean: Option<f64>, se: Option<f64>, n: usize) -> Option<Estimate> {
        Some(Estimate { mean: mean?, se: se?, n })
    }

    pub fn iterations(&self) -> Option<Estimate> {
        Self::pair(self.mean_iterations, self.mean_iterations_se, self.converged)
    }

    pub fn unassigned(&self) -> Option<Estimate> {
        Self::pair(self.mean_unassigned, self.mean_unassigned_se, self.converged)
    }

    pub fn agreement(&self) -> Option<Estimate> {
        Self::pair(self.mean_agree_with_root, self.mean_agree_with_root_se, self.converged)
    }

    pub fn energy_gap(&self) -> Option<Estimate> {
        Self::pair(self.mean_final_energy_gap, self.mean_final_energy_gap_se, self.converged)
    }
}

/// Per-trial detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRun {
    #[serde(rename = "E")]
    pub energy: usize,
    pub trial: usize,
    pub instance_seed: u64,
    #[serde(flatten)]
    pub run: RunRecord,
}

/// One [`SweepRecord`] per entry of `cfg.e_list`, in order.
pub fn finite_energy_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, ExpError> {
    Ok(finite_energy_sweep_runs(cfg)?.0)
}

/// As [`finite_energy_sweep`], also returning every trial.
pub fn finite_energy_sweep_runs(cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, Vec<TrialRun>), ExpError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .e_list
        .iter()
        .flat_map(|&e| (0..cfg.trials).map(move |t| (e, t)))
        .collect();
    let runs: Vec<TrialRun> = jobs
        .par_iter()
        .map(|&(e, trial)| {
            let (inst_seed, wp_seed) = cfg.trial_seeds(e, trial);
            let inst = gen_planted_energy(&cfg.gen_config(e, inst_seed), e).expect("validated");
            let start = Instant::now();
            let d = wp_decide(&inst.formula, wp_seed, &cfg.decide);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            TrialRun {
                energy: e,
                trial,
                instance_seed: inst_seed,
                run: RunRecord::new(wp_seed, &d, Some(&inst.root), ms),
            }
        })
        .collect();
    let records = runs
        .chunks(cfg.trials)
        .zip(&cfg.e_list)
        .map(|(chunk, &e)| {
            let rs: Vec<RunRecord> = chunk.iter().map(|t| t.run.clone()).collect();
            SweepRecord::from_runs(e, &rs)
        })
        .collect();
    Ok((records, runs))
}
