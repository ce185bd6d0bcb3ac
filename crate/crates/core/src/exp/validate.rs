//! Cross-checks of the decision procedure against exhaustive ground truth.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use super::{Estimate, ExpError};
use crate::generators::{generate, sample_psat_rejection, GenConfig, PsatSample};
use crate::oracle;
use crate::rng::{derive_path, derive_seed, rng_from_seed};
use crate::theory::{small_gamma, solve_rho0, SeriesControl};
use crate::wp::{wp_decide, DecideParams, Decision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// SAT declared but the witness has nonzero energy.
    NonzeroWitness,
    /// SAT declared on a formula the oracle finds unsatisfiable.
    SatButUnsat,
    /// Reported energy below the true minimum.
    BelowGroundState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
    pub n_vars: usize,
    pub n_clauses: usize,
    pub distribution: String,
    pub instance_seed: u64,
    pub wp_seed: u64,
    pub final_energy: usize,
    /// Oracle minimum when known.
    pub e0: Option<usize>,
}

/// One mixed instance: `(index, config, wp seed)`.
type Draw = (usize, GenConfig, u64);

fn mixed_draws(seed: u64, count: usize, n_range: (usize, usize), alphas: &[f64]) -> Vec<Draw> {
    (0..count)
        .map(|t| {
            let mut rng = rng_from_seed(derive_path(seed, &[t as u64, 2]));
            let n = rng.gen_range(n_range.0..=n_range.1);
            let alpha = *alphas.choose(&mut rng).expect("nonempty");
            let m = GenConfig::clauses_for_ratio(n, alpha);
            let inst_seed = derive_path(seed, &[t as u64, 0]);
            let cfg = if t % 2 == 0 {
                GenConfig::uniform(n, 3, m, inst_seed)
            } else {
                GenConfig::planted(n, 3, m, inst_seed)
            };
            (t, cfg, derive_path(seed, &[t as u64, 1]))
        })
        .collect()
}

fn violation(t: usize, cfg: &GenConfig, wp_seed: u64, kind: ViolationKind, d: &Decision, e0: Option<usize>) -> Violation {
    Violation {
        index: t,
        kind,
        n_vars: cfg.n_vars,
        n_clauses: cfg.n_clauses,
        distribution: cfg.distribution.tag(),
        instance_seed: cfg.seed,
        wp_seed,
        final_energy: d.final_energy,
        e0,
    }
}

/// Recounts the energy of a SAT witness from the clause list.
fn witness_energy(d: &Decision, f: &crate::formula::Formula) -> Option<usize> {
    let w = d.witness()?.to_bools()?;
    Some(f.violated(&w))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructivenessConfig {
    pub seed: u64,
    pub instances: usize,
    /// Inclusive.
    pub n_range: (usize, usize),
    /// Inclusive; `alpha` is drawn from a grid of step 0.5.
    pub alpha_range: (f64, f64),
    pub decide: DecideParams,
}

impl Default for ConstructivenessConfig {
    fn default() -> Self {
        ConstructivenessConfig {
            seed: 0,
            instances: 10_000,
            n_range: (10, 200),
            alpha_range: (2.0, 12.0),
            decide: DecideParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructivenessReport {
    pub instances: usize,
    pub sat_declared: usize,
    pub violations: Vec<Violation>,
}

/// Every SAT verdict over a mixed uniform/planted batch must carry a witness
/// of energy zero. No ground truth is needed.
pub fn constructiveness(cfg: &ConstructivenessConfig) -> Result<ConstructivenessReport, ExpError> {
    let (lo, hi) = cfg.alpha_range;
    if !(lo <= hi && lo >= 0.0) || cfg.n_range.0 < 3 || cfg.n_range.0 > cfg.n_range.1 {
        return Err(ExpError::Config(format!(
            "bad ranges N {:?}, alpha {:?}",
            cfg.n_range, cfg.alpha_range
        )));
    }
    let steps = ((hi - lo) / 0.5).floor() as usize;
    let alphas: Vec<f64> = (0..=steps).map(|j| lo + 0.5 * j as f64).collect();
    let draws = mixed_draws(cfg.seed, cfg.instances, cfg.n_range, &alphas);
    let results: Vec<(bool, Option<Violation>)> = draws
        .par_iter()
        .map(|(t, g, wp_seed)| {
            let inst = generate(g).expect("ranges checked");
            let d = wp_decide(inst.formula(), *wp_seed, &cfg.decide);
            let bad = match witness_energy(&d, inst.formula()) {
                Some(e) if e != 0 => Some(violation(*t, g, *wp_seed, ViolationKind::NonzeroWitness, &d, None)),
                _ => None,
            };
            (d.verdict.is_sat(), bad)
        })
        .collect();
    Ok(ConstructivenessReport {
        instances: cfg.instances,
        sat_declared: results.iter().filter(|r| r.0).count(),
        violations: results.into_iter().filter_map(|r| r.1).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationConfig {
    pub seed: u64,
    pub instances: usize,
    /// Inclusive, at most the oracle limit.
    pub n_range: (usize, usize),
    pub alphas: Vec<f64>,
    pub decide: DecideParams,
    /// SAT-conditioned field sample: formulas drawn by rejection at
    /// `(sat_n_vars, sat_alpha)`. Zero samples skips it.
    pub sat_n_vars: usize,
    pub sat_alpha: f64,
    pub sat_samples: usize,
    pub sat_max_attempts: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            seed: 0,
            instances: 200,
            n_range: (8, 16),
            alphas: vec![2.0, 4.0, 8.0, 10.0],
            decide: DecideParams::default(),
            sat_n_vars: 12,
            sat_alpha: 10.0,
            sat_samples: 20,
            sat_max_attempts: 1_000_000,
        }
    }
}

/// Exact fields of SAT-conditioned formulas against the theory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatFieldSummary {
    pub n_vars: usize,
    pub alpha: f64,
    pub requested: usize,
    pub accepted: usize,
    pub mean_attempts: f64,
    /// Mean over formulas of the fraction of variables with zero exact field.
    pub zero_fraction: f64,
    pub zero_fraction_se: f64,
    /// `rho0` of the satisfiable limit.
    pub rho0_theory: f64,
    /// `e^{-gamma}`.
    pub planted_zero_theory: f64,
}

impl SatFieldSummary {
    pub fn zero(&self) -> Estimate {
        Estimate {
            mean: self.zero_fraction,
            se: self.zero_fraction_se,
            n: self.accepted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub instances: usize,
    pub sat_declared: usize,
    /// Formulas the oracle finds satisfiable.
    pub oracle_sat: usize,
    /// Runs where the reported energy equals the oracle minimum.
    pub optimal: usize,
    pub violations: Vec<Violation>,
    pub sat_fields: Option<SatFieldSummary>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn oracle_validation(seed: u64, instances: usize) -> Result<ValidationReport, ExpError> {
    oracle_validation_with(&ValidationConfig {
        seed,
        instances,
        ..Default::default()
    })
}

/// Mixed uniform/planted instances (even index uniform, odd planted) with
/// `N` drawn from `n_range` and `alpha` from `alphas`, each decided by WP and
/// checked against exhaustive enumeration.
pub fn oracle_validation_with(cfg: &ValidationConfig) -> Result<ValidationReport, ExpError> {
    let (lo, hi) = cfg.n_range;
    if lo < 3 || lo > hi || hi > oracle::MAX_ORACLE_VARS || cfg.alphas.is_empty() {
        return Err(ExpError::Config(format!(
            "need 3 <= N <= {} and at least one alpha, got N {:?}",
            oracle::MAX_ORACLE_VARS,
            cfg.n_range
        )));
    }
    let draws = mixed_draws(cfg.seed, cfg.instances, cfg.n_range, &cfg.alphas);
    let results = draws
        .par_iter()
        .map(|(t, g, wp_seed)| -> Result<(bool, bool, bool, Vec<Violation>), ExpError> {
            let inst = generate(g)?;
            let f = inst.formula();
            let truth = oracle::enumerate_capped(f, 1)?;
            let d = wp_decide(f, *wp_seed, &cfg.decide);
            let mut v = Vec::new();
            let mut flag = |kind| v.push(violation(*t, g, *wp_seed, kind, &d, Some(truth.e0)));
            if d.verdict.is_sat() {
                if witness_energy(&d, f) != Some(0) {
                    flag(ViolationKind::NonzeroWitness);
                }
                if truth.e0 != 0 {
                    flag(ViolationKind::SatButUnsat);
                }
            }
            if d.final_energy < truth.e0 {
                flag(ViolationKind::BelowGroundState);
            }
            Ok((d.verdict.is_sat(), truth.e0 == 0, d.final_energy == truth.e0, v))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sat_fields = if cfg.sat_samples > 0 {
        Some(sat_field_summary(cfg)?)
    } else {
        None
    };
    Ok(ValidationReport {
        instances: cfg.instances,
        sat_declared: results.iter().filter(|r| r.0).count(),
        oracle_sat: results.iter().filter(|r| r.1).count(),
        optimal: results.iter().filter(|r| r.2).count(),
        violations: results.into_iter().flat_map(|r| r.3).collect(),
        sat_fields,
    })
}

fn sat_field_summary(cfg: &ValidationConfig) -> Result<SatFieldSummary, ExpError> {
    let n = cfg.sat_n_vars;
    let m = GenConfig::clauses_for_ratio(n, cfg.sat_alpha);
    let base = derive_seed(cfg.seed, u64::MAX);
    let samples = (0..cfg.sat_samples)
        .into_par_iter()
        .map(|j| -> Result<(u64, Option<f64>), ExpError> {
            let g = GenConfig::uniform(n, 3, m, derive_seed(base, j as u64));
            match sample_psat_rejection(&g, cfg.sat_max_attempts)? {
                PsatSample::Accepted { formula, attempts } => {
                    Ok((attempts, Some(oracle::exact_fields(&formula)?.zero_fraction)))
                }
                PsatSample::Exhausted { attempts } => Ok((attempts, None)),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let zeros: Vec<f64> = samples.iter().filter_map(|s| s.1).collect();
    let est = Estimate::of(&zeros);
    let rho0 = solve_rho0(3, cfg.sat_alpha, &SeriesControl::default())?.rho0;
    Ok(SatFieldSummary {
        n_vars: n,
        alpha: cfg.sat_alpha,
        requested: cfg.sat_samples,
        accepted: zeros.len(),
        mean_attempts: samples.iter().map(|s| s.0 as f64).sum::<f64>() / samples.len() as f64,
        zero_fraction: est.map_or(f64::NAN, |e| e.mean),
        zero_fraction_se: est.map_or(f64::INFINITY, |e| e.se),
        rho0_theory: rho0,
        planted_zero_theory: (-small_gamma(3, cfg.sat_alpha)).exp(),
    })
}
