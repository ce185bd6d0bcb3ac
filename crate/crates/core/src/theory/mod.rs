//! Replica-symmetric cavity predictions for random K-SAT.
//!
//! [`infinite`] covers the satisfiable limit (`nu -> inf`): the zero-field
//! weight `rho0`, the Poisson field weights, `omega(0)`, the relative entropy
//! between the planted and SAT-conditioned ensembles, the occurrence bias, the
//! occurrence generating function and the check for non-integer fields.
//! [`finite_nu`] solves the finite chemical potential equations built on the
//! Bessel sums of [`bessel`].

pub mod bessel;
pub mod finite_nu;
pub mod infinite;

pub use bessel::{bessel_i, big_i, log_bessel_i, BigI};
pub use finite_nu::{free_energy, free_energy_at, gs_energy, solve_finite_nu, solve_r0, FiniteNuSolution, GsEnergy};
pub use infinite::{
    alpha_s_scan, bias_theory, big_gamma, cavity, default_n_max, field_weights_inf, noninteger_check, occurrence_gf, omega0,
    planted_field_dist, relative_entropy_per_var, small_gamma, solve_rho0, AlphaScan, BiasMode, BiasTheory, Cavity,
    FieldWeights, NonIntegerCheck, OccurrenceGf, Omega0, RelativeEntropy, Rho0,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("nu must be positive, got {nu}")]
    NonPositiveNu { nu: f64 },
    #[error("Bessel argument {z} is beyond the power-series range; a scaled evaluation would be needed")]
    BesselOverflow { z: f64 },
    #[error("{what} did not converge within {terms} terms")]
    SeriesLimit { what: &'static str, terms: usize },
    #[error("fixed point not reached after {iterations} iterations (last iterate {last})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error("{0}")]
    Domain(String),
}

/// Tolerances for series truncation and fixed-point solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub fixed_point_tol: f64,
    pub max_fp_iters: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-14,
            max_terms: 500,
            fixed_point_tol: 1e-12,
            max_fp_iters: 10_000,
        }
    }
}

/// Everything computed at one `(K, alpha, nu)`. `nu = None` is the
/// satisfiable limit, where the finite-`nu` fields are absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryPoint {
    pub k: usize,
    pub alpha: f64,
    pub nu: Option<f64>,
    pub rho0: f64,
    pub gamma_big: f64,
    pub gamma: f64,
    /// `alpha' = alpha / (1 - w^K)` and `q = w^{K-1}`.
    pub alpha_prime: f64,
    pub q: f64,
    /// Weight of the zero field at finite `nu`.
    pub r0: Option<f64>,
    pub b: Option<f64>,
    /// `r_n` (finite `nu`) or `rho_n` for `0 <= n <= n_max`.
    pub field_weights: Vec<f64>,
    pub field_tail: f64,
    pub free_energy: Option<f64>,
    pub gs_energy: Option<GsEnergy>,
    pub omega0: f64,
    pub omega0_approx: f64,
    pub sigma_per_var: [f64; 2],
    pub sigma_leading: f64,
    pub bias: f64,
    /// First-order finite-`nu` bias.
    pub bias_nu: Option<f64>,
}

pub fn theory_point(k: usize, alpha: f64, nu: Option<f64>, ctl: &SeriesControl) -> Result<TheoryPoint, TheoryError> {
    let cav = cavity(k, alpha, ctl)?;
    let om = omega0(k, alpha, ctl)?;
    let sigma = relative_entropy_per_var(k, alpha, ctl)?;
    let bias = bias_theory(k, alpha, nu.map_or(BiasMode::Satisfiable, BiasMode::Nu), ctl)?;
    let mut p = TheoryPoint {
        k,
        alpha,
        nu,
        rho0: cav.rho0,
        gamma_big: cav.gamma_big,
        gamma: small_gamma(k, alpha),
        alpha_prime: cav.alpha_prime,
        q: cav.q,
        r0: None,
        b: None,
        field_weights: Vec::new(),
        field_tail: 0.0,
        free_energy: None,
        gs_energy: None,
        omega0: om.exact,
        omega0_approx: om.approx,
        sigma_per_var: [sigma.lo, sigma.hi],
        sigma_leading: sigma.leading,
        bias: bias.exact,
        bias_nu: bias.corrected,
    };
    match nu {
        None => {
            let w = field_weights_inf(k, alpha, None, ctl)?;
            p.field_weights = w.weights;
            p.field_tail = w.tail;
        }
        Some(nu) => {
            let sol = solve_finite_nu(k, alpha, nu, None, ctl)?;
            p.r0 = Some(sol.r0);
            p.b = Some(sol.coeffs.b);
            p.field_weights = sol.weights.weights;
            p.field_tail = sol.weights.tail;
            p.free_energy = Some(free_energy_at(k, alpha, nu, sol.r0, ctl)?);
            p.gs_energy = Some(gs_energy(k, alpha, nu, ctl)?);
        }
    }
    Ok(p)
}

/// One CSV row: `k, alpha, nu, rho0, F, e0, omega0, sigma_lo, sigma_hi, bias`.
/// `nu` is written as `inf` in the satisfiable limit, where `F` and `e0` are
/// left empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub k: usize,
    pub alpha: f64,
    pub nu: String,
    pub rho0: f64,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub e0: Option<f64>,
    pub omega0: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub bias: f64,
}

impl From<&TheoryPoint> for TheoryRow {
    fn from(p: &TheoryPoint) -> Self {
        TheoryRow {
            k: p.k,
            alpha: p.alpha,
            nu: p.nu.map_or_else(|| "inf".to_string(), |v| v.to_string()),
            rho0: p.rho0,
            f: p.free_energy,
            e0: p.gs_energy.map(|g| g.finite_difference),
            omega0: p.omega0,
            sigma_lo: p.sigma_per_var[0],
            sigma_hi: p.sigma_per_var[1],
            bias: p.bias,
        }
    }
}
