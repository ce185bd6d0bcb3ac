//! Statistics of planted instances measured at the root.

use rayon::prelude::*;
use serde::Serialize;

use super::{Estimate, ExpError};
use crate::formula::Value;
use crate::generators::{gen_planted, GenConfig, PlantedInstance};
use crate::rng::derive_seed;
use crate::theory::{default_n_max, planted_field_dist, small_gamma};

/// A batch of planted instances; instance `i` uses `derive_seed(seed, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub k: usize,
    pub alpha: f64,
    pub n_vars: usize,
    pub instances: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn n_clauses(&self) -> usize {
        GenConfig::clauses_for_ratio(self.n_vars, self.alpha)
    }

    fn validate(&self) -> Result<(), ExpError> {
        if self.instances == 0 {
            return Err(ExpError::Config("instances must be at least 1".into()));
        }
        GenConfig::planted(self.n_vars, self.k, self.n_clauses(), self.seed).validate()?;
        Ok(())
    }

    /// Applies `f` to every instance in parallel; results in instance order.
    fn map<T: Send>(&self, f: impl Fn(&PlantedInstance) -> T + Sync) -> Vec<T> {
        let m = self.n_clauses();
        (0..self.instances)
            .into_par_iter()
            .map(|i| {
                let cfg = GenConfig::planted(self.n_vars, self.k, m, derive_seed(self.seed, i as u64));
                f(&gen_planted(&cfg).expect("validated"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldBin {
    pub n: i64,
    pub count: u64,
    pub empirical: f64,
    /// Planted prediction `e^{-gamma}` at 0, `gamma^|n| e^{-gamma} / (2 |n|!)`
    /// elsewhere.
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldStats {
    pub config: EnsembleConfig,
    pub gamma: f64,
    pub samples: u64,
    pub bins: Vec<FieldBin>,
    /// Over the bins, plus the predicted mass outside them.
    pub tv_distance: f64,
    pub zero_fraction: f64,
    pub zero_fraction_se: f64,
    /// `e^{-gamma}`.
    pub zero_theory: f64,
}

impl FieldStats {
    pub fn zero(&self) -> Estimate {
        Estimate {
            mean: self.zero_fraction,
            se: self.zero_fraction_se,
            n: self.samples as usize,
        }
    }
}

/// Histogram of the flip field of every variable at the root, compared with
/// the planted prediction. With `z = E(x_i FALSE) - E(x_i TRUE)` the field is
/// positive for root-TRUE and negative for root-FALSE variables.
pub fn field_statistics(cfg: &EnsembleConfig) -> Result<FieldStats, ExpError> {
    cfg.validate()?;
    let per_instance = cfg.map(|inst| {
        let root = inst.root_bools();
        (0..cfg.n_vars)
            .map(|i| inst.formula.local_flip_field(&root, i))
            .collect::<Vec<i64>>()
    });
    let gamma = small_gamma(cfg.k, cfg.alpha);
    let observed_max = per_instance.iter().flatten().map(|z| z.unsigned_abs()).max().unwrap_or(0) as usize;
    let n_max = observed_max.max(default_n_max(gamma));
    let mut counts = vec![0u64; 2 * n_max + 1];
    for z in per_instance.iter().flatten() {
        counts[(z + n_max as i64) as usize] += 1;
    }
    let samples: u64 = counts.iter().sum();
    let theory = planted_field_dist(cfg.k, cfg.alpha, Some(n_max))?;
    let bins: Vec<FieldBin> = counts
        .iter()
        .enumerate()
        .map(|(j, &count)| {
            let n = j as i64 - n_max as i64;
            FieldBin {
                n,
                count,
                empirical: count as f64 / samples as f64,
                theory: theory.weight(n),
            }
        })
        .collect();
    let tv = 0.5 * (bins.iter().map(|b| (b.empirical - b.theory).abs()).sum::<f64>() + theory.tail);
    let zero = Estimate::proportion(counts[n_max] as usize, samples as usize);
    Ok(FieldStats {
        config: *cfg,
        gamma,
        samples,
        bins,
        tv_distance: tv,
        zero_fraction: zero.mean,
        zero_fraction_se: zero.se,
        zero_theory: (-gamma).exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasStats {
    pub config: EnsembleConfig,
    /// Root-TRUE variables with nonzero degree.
    pub true_vars: usize,
    /// Mean of `(l+ - l-)/(l+ + l-)`.
    pub mean_true: f64,
    pub se_true: f64,
    pub false_vars: usize,
    pub mean_false: f64,
    pub se_false: f64,
    /// `(<l+> - <l->) / (<l+> + <l->)` among root-TRUE variables.
    pub ratio_of_means_true: f64,
    /// `1 / (2^K - 1)`.
    pub theory: f64,
}

impl BiasStats {
    pub fn root_true(&self) -> Estimate {
        Estimate {
            mean: self.mean_true,
            se: self.se_true,
            n: self.true_vars,
        }
    }

    pub fn root_false(&self) -> Estimate {
        Estimate {
            mean: self.mean_false,
            se: self.se_false,
            n: self.false_vars,
        }
    }
}

/// Occurrence bias of each variable split by its root value.
pub fn bias_statistics(cfg: &EnsembleConfig) -> Result<BiasStats, ExpError> {
    cfg.validate()?;
    // (root value, l+, l-) for every variable of nonzero degree
    let per_instance = cfg.map(|inst| {
        (0..cfg.n_vars)
            .filter(|&i| inst.formula.degree(i) > 0)
            .map(|i| {
                let occ = inst.formula.occurrences_of(i);
                let plus = occ.iter().filter(|o| o.positive).count();
                (inst.root.get(i) == Value::True, plus, occ.len() - plus)
            })
            .collect::<Vec<_>>()
    });
    let mut t = Vec::new();
    let mut f = Vec::new();
    let (mut sum_plus, mut sum_minus) = (0usize, 0usize);
    for &(root, p, m) in per_instance.iter().flatten() {
        let b = (p as f64 - m as f64) / (p + m) as f64;
        if root {
            t.push(b);
            sum_plus += p;
            sum_minus += m;
        } else {
            f.push(b);
        }
    }
    let nan = Estimate {
        mean: f64::NAN,
        se: f64::INFINITY,
        n: 0,
    };
    let et = Estimate::of(&t).unwrap_or(nan);
    let ef = Estimate::of(&f).unwrap_or(nan);
    Ok(BiasStats {
        config: *cfg,
        true_vars: t.len(),
        mean_true: et.mean,
        se_true: et.se,
        false_vars: f.len(),
        mean_false: ef.mean,
        se_false: ef.se,
        ratio_of_means_true: (sum_plus as f64 - sum_minus as f64) / (sum_plus + sum_minus) as f64,
        theory: 1.0 / (2f64.powi(cfg.k as i32) - 1.0),
    })
}
