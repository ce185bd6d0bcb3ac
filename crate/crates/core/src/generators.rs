//! Seeded samplers for the uniform, planted and energy-planted ensembles.
//!
//! Each clause picks `K` distinct variables uniformly (rejection on repeated
//! draws, so every `K`-subset is equally likely) and then a polarity pattern:
//!
//! * uniform: any of the `2^K` patterns;
//! * planted: any of the `2^K - 1` patterns satisfied by the root;
//! * energy-planted: the first `E` clauses get the unique pattern violated by
//!   the root, the rest are planted.
//!
//! A polarity pattern is a bitmask with bit `p` set when slot `p` is an
//! unnegated literal.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimacs::DimacsMeta;
use crate::formula::{Assignment, Formula, Literal};
use crate::oracle;
use crate::rng::{derive_seed, rng_from_seed, Rng, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("clause width K={k} must be at least 2")]
    WidthTooSmall { k: usize },
    #[error("clause width K={k} exceeds the number of variables N={n_vars}")]
    WidthExceedsVars { k: usize, n_vars: usize },
    #[error("clause width K={k} is above the supported maximum of 32")]
    WidthTooLarge { k: usize },
    #[error("planted energy E={energy} exceeds the number of clauses M={n_clauses}")]
    EnergyExceedsClauses { energy: usize, n_clauses: usize },
    #[error("rejection sampling needs N <= {max}, got {n_vars}")]
    TooManyVarsForOracle { n_vars: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    Planted,
    /// Planted with the first `E` clauses violated by the root.
    PlantedEnergy(usize),
}

impl Distribution {
    pub fn tag(self) -> String {
        match self {
            Distribution::Uniform => "uniform".into(),
            Distribution::Planted => "planted".into(),
            Distribution::PlantedEnergy(e) => format!("planted-e({e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_vars: usize,
    pub k: usize,
    pub n_clauses: usize,
    pub seed: u64,
    pub distribution: Distribution,
}

impl GenConfig {
    pub fn uniform(n_vars: usize, k: usize, n_clauses: usize, seed: u64) -> Self {
        GenConfig {
            n_vars,
            k,
            n_clauses,
            seed,
            distribution: Distribution::Uniform,
        }
    }

    pub fn planted(n_vars: usize, k: usize, n_clauses: usize, seed: u64) -> Self {
        GenConfig {
            distribution: Distribution::Planted,
            ..Self::uniform(n_vars, k, n_clauses, seed)
        }
    }

    pub fn planted_energy(n_vars: usize, k: usize, n_clauses: usize, energy: usize, seed: u64) -> Self {
        GenConfig {
            distribution: Distribution::PlantedEnergy(energy),
            ..Self::uniform(n_vars, k, n_clauses, seed)
        }
    }

    /// `M = round(alpha * N)`.
    pub fn clauses_for_ratio(n_vars: usize, alpha: f64) -> usize {
        (alpha * n_vars as f64).round() as usize
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GenConfig { seed, ..self }
    }

    pub fn alpha(&self) -> f64 {
        self.n_clauses as f64 / self.n_vars as f64
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.k < 2 {
            return Err(GenError::WidthTooSmall { k: self.k });
        }
        if self.k > 32 {
            return Err(GenError::WidthTooLarge { k: self.k });
        }
        if self.k > self.n_vars {
            return Err(GenError::WidthExceedsVars {
                k: self.k,
                n_vars: self.n_vars,
            });
        }
        if let Distribution::PlantedEnergy(e) = self.distribution {
            if e > self.n_clauses {
                return Err(GenError::EnergyExceedsClauses {
                    energy: e,
                    n_clauses: self.n_clauses,
                });
            }
        }
        Ok(())
    }
}

/// A formula together with the assignment it was planted around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub formula: Formula,
    pub root: Assignment,
    /// Exactly `energy(formula, root)`.
    pub planted_energy: usize,
    pub seed: u64,
    pub distribution: Distribution,
}

impl PlantedInstance {
    pub fn root_bools(&self) -> Vec<bool> {
        self.root.to_bools().expect("root is total")
    }

    pub fn dimacs_meta(&self) -> DimacsMeta {
        DimacsMeta {
            seed: Some(self.seed),
            rng: Some(RNG_ALGORITHM.to_string()),
            distribution: Some(self.distribution.tag()),
            root: Some(self.root_bools()),
            planted_energy: Some(self.planted_energy as u64),
            comments: Vec::new(),
        }
    }
}

fn draw_vars(rng: &mut Rng, n_vars: usize, k: usize, out: &mut [usize]) {
    let mut filled = 0;
    while filled < k {
        let v = rng.gen_range(0..n_vars);
        if !out[..filled].contains(&v) {
            out[filled] = v;
            filled += 1;
        }
    }
}

/// Pattern whose every literal is false under `root`.
fn violating_pattern(root: &[bool], vars: &[usize]) -> u32 {
    vars.iter()
        .enumerate()
        .filter(|(_, &v)| !root[v])
        .fold(0, |m, (p, _)| m | (1 << p))
}

fn push_clause(lits: &mut Vec<Literal>, vars: &[usize], pattern: u32) {
    lits.extend(
        vars.iter()
            .enumerate()
            .map(|(p, &v)| Literal::new(v, pattern >> p & 1 == 1)),
    );
}

/// Shared clause loop. `violated` is the number of leading clauses that take
/// the root-violating pattern; `root = None` means uniform polarities.
fn sample_clauses(cfg: &GenConfig, rng: &mut Rng, root: Option<&[bool]>, violated: usize) -> Formula {
    let k = cfg.k;
    let n_patterns: u64 = 1 << k;
    let mut vars = vec![0usize; k];
    let mut lits = Vec::with_capacity(cfg.n_clauses * k);
    for a in 0..cfg.n_clauses {
        draw_vars(rng, cfg.n_vars, k, &mut vars);
        let pattern = match root {
            None => rng.gen_range(0..n_patterns) as u32,
            Some(root) => {
                let bad = violating_pattern(root, &vars);
                if a < violated {
                    bad
                } else {
                    let r = rng.gen_range(0..n_patterns - 1) as u32;
                    if r >= bad {
                        r + 1
                    } else {
                        r
                    }
                }
            }
        };
        push_clause(&mut lits, &vars, pattern);
    }
    Formula::from_flat(cfg.n_vars, k, lits).expect("sampled clauses are well formed")
}

/// `M` independent clauses, each uniform over variable sets and polarities.
pub fn gen_uniform(cfg: &GenConfig) -> Result<Formula, GenError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    Ok(sample_clauses(cfg, &mut rng, None, 0))
}

fn gen_with_root(cfg: &GenConfig, violated: usize) -> Result<PlantedInstance, GenError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let root: Vec<bool> = (0..cfg.n_vars).map(|_| rng.gen()).collect();
    let formula = sample_clauses(cfg, &mut rng, Some(&root), violated);
    Ok(PlantedInstance {
        formula,
        root: Assignment::from_bools(&root),
        planted_energy: violated,
        seed: cfg.seed,
        distribution: cfg.distribution,
    })
}

/// Uniform root, then `M` clauses uniform among those the root satisfies.
///
/// The distribution tag of `cfg` is ignored; the result is always planted.
pub fn gen_planted(cfg: &GenConfig) -> Result<PlantedInstance, GenError> {
    gen_with_root(
        &GenConfig {
            distribution: Distribution::Planted,
            ..*cfg
        },
        0,
    )
}

/// Planted instance whose first `E` clauses are violated by the root.
pub fn gen_planted_energy(cfg: &GenConfig, energy: usize) -> Result<PlantedInstance, GenError> {
    gen_with_root(
        &GenConfig {
            distribution: Distribution::PlantedEnergy(energy),
            ..*cfg
        },
        energy,
    )
}

/// A generated instance of any distribution; uniform instances have no root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Uniform { formula: Formula, seed: u64 },
    Planted(PlantedInstance),
}

impl Instance {
    pub fn formula(&self) -> &Formula {
        match self {
            Instance::Uniform { formula, .. } => formula,
            Instance::Planted(p) => &p.formula,
        }
    }

    pub fn root(&self) -> Option<&Assignment> {
        match self {
            Instance::Uniform { .. } => None,
            Instance::Planted(p) => Some(&p.root),
        }
    }

    pub fn dimacs_meta(&self) -> DimacsMeta {
        match self {
            Instance::Uniform { seed, .. } => DimacsMeta {
                seed: Some(*seed),
                rng: Some(RNG_ALGORITHM.to_string()),
                distribution: Some(Distribution::Uniform.tag()),
                ..Default::default()
            },
            Instance::Planted(p) => p.dimacs_meta(),
        }
    }
}

/// Dispatches on `cfg.distribution`.
pub fn generate(cfg: &GenConfig) -> Result<Instance, GenError> {
    Ok(match cfg.distribution {
        Distribution::Uniform => Instance::Uniform {
            formula: gen_uniform(cfg)?,
            seed: cfg.seed,
        },
        Distribution::Planted => Instance::Planted(gen_planted(cfg)?),
        Distribution::PlantedEnergy(e) => Instance::Planted(gen_planted_energy(cfg, e)?),
    })
}

/// Outcome of rejection sampling from the SAT-conditioned ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsatSample {
    Accepted { formula: Formula, attempts: u64 },
    Exhausted { attempts: u64 },
}

impl PsatSample {
    pub fn formula(&self) -> Option<&Formula> {
        match self {
            PsatSample::Accepted { formula, .. } => Some(formula),
            PsatSample::Exhausted { .. } => None,
        }
    }

    pub fn attempts(&self) -> u64 {
        match self {
            PsatSample::Accepted { attempts, .. } | PsatSample::Exhausted { attempts } => *attempts,
        }
    }
}

fn check_oracle_size(cfg: &GenConfig) -> Result<(), GenError> {
    if cfg.n_vars > oracle::MAX_ORACLE_VARS {
        return Err(GenError::TooManyVarsForOracle {
            n_vars: cfg.n_vars,
            max: oracle::MAX_ORACLE_VARS,
        });
    }
    Ok(())
}

/// Draws uniform formulas (attempt `t` uses `derive_seed(cfg.seed, t)`) until
/// one is satisfiable.
pub fn sample_psat_rejection(cfg: &GenConfig, max_attempts: u64) -> Result<PsatSample, GenError> {
    cfg.validate()?;
    check_oracle_size(cfg)?;
    for t in 0..max_attempts {
        let f = gen_uniform(&cfg.with_seed(derive_seed(cfg.seed, t)))?;
        if oracle::is_satisfiable(&f).expect("size checked") {
            return Ok(PsatSample::Accepted {
                formula: f,
                attempts: t + 1,
            });
        }
    }
    Ok(PsatSample::Exhausted {
        attempts: max_attempts,
    })
}

/// Empirical satisfiability rate of the uniform ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsatEstimate {
    pub draws: u64,
    pub accepted: u64,
    pub rate: f64,
    /// `ln(rate) / N`; `-inf` when nothing was accepted.
    pub log_rate_per_var: f64,
    /// Delta-method standard error of `log_rate_per_var`.
    pub log_rate_per_var_se: f64,
}

/// Satisfiability rate over `draws` independent uniform formulas
/// (draw `t` uses `derive_seed(cfg.seed, t)`, the same stream as
/// [`sample_psat_rejection`]).
pub fn estimate_psat(cfg: &GenConfig, draws: u64) -> Result<PsatEstimate, GenError> {
    cfg.validate()?;
    check_oracle_size(cfg)?;
    let accepted: u64 = (0..draws)
        .into_par_iter()
        .map(|t| {
            let f = gen_uniform(&cfg.with_seed(derive_seed(cfg.seed, t))).expect("validated");
            u64::from(oracle::is_satisfiable(&f).expect("size checked"))
        })
        .sum();
    let rate = accepted as f64 / draws.max(1) as f64;
    let n = cfg.n_vars as f64;
    let se = if accepted > 0 {
        ((1.0 - rate) / (accepted as f64)).sqrt() / n
    } else {
        f64::INFINITY
    };
    Ok(PsatEstimate {
        draws,
        accepted,
        rate,
        log_rate_per_var: rate.ln() / n,
        log_rate_per_var_se: se,
    })
}
