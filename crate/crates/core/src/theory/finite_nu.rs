//! Finite chemical potential: the `r_n` fixed point, the free energy and the
//! ground-state energy.
//!
//! With `w = (1 - r0)/2`, `D = 1 + w^K (e^{-nu} - 1)`, `B = w^{K-1} e^{-nu/2} / D`
//! and `z = alpha K B`, the weights are `r_n = e^{nu |n|/2} I_n(z) / I(z, nu)`
//! and `r0` solves `r0 = I_0(z(r0)) / I(z(r0), nu)`.

use serde::Serialize;

use super::bessel::{big_i, log_bessel_i, BigI};
use super::infinite::{check_k_alpha, default_n_max, small_gamma, solve_rho0, FieldWeights};
use super::{SeriesControl, TheoryError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub w: f64,
    pub d: f64,
    pub b: f64,
    pub z: f64,
}

pub fn coefficients(k: usize, alpha: f64, nu: f64, r0: f64) -> Coefficients {
    let w = 0.5 * (1.0 - r0);
    let wk = w.powi(k as i32);
    let d = 1.0 + wk * ((-nu).exp() - 1.0);
    let b = w.powi(k as i32 - 1) * (-0.5 * nu).exp() / d;
    Coefficients {
        w,
        d,
        b,
        z: alpha * k as f64 * b,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteNuSolution {
    pub k: usize,
    pub alpha: f64,
    pub nu: f64,
    pub r0: f64,
    pub coeffs: Coefficients,
    #[serde(skip)]
    pub big_i: BigI,
    /// Fixed-point iterations used.
    pub iterations: usize,
    /// `r_n` for `0 <= n <= n_max` and the bounded mass beyond.
    pub weights: FieldWeights,
}

fn r0_map(k: usize, alpha: f64, nu: f64, r0: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    let c = coefficients(k, alpha, nu, r0);
    let bi = big_i(c.z, nu, ctl)?;
    Ok((log_bessel_i(0, c.z, ctl)? - bi.value.ln()).exp())
}

/// Damped iteration `r0 <- (r0 + I_0/I) / 2` from `r0 = 0`.
pub fn solve_r0(k: usize, alpha: f64, nu: f64, ctl: &SeriesControl) -> Result<(f64, usize), TheoryError> {
    check_k_alpha(k, alpha)?;
    if nu.is_nan() || nu <= 0.0 {
        return Err(TheoryError::NonPositiveNu { nu });
    }
    let mut r = 0.0;
    for it in 1..=ctl.max_fp_iters {
        let next = r0_map(k, alpha, nu, r, ctl)?;
        if (next - r).abs() <= ctl.fixed_point_tol * next.abs().max(1e-300) {
            return Ok((next, it));
        }
        r = 0.5 * r + 0.5 * next;
    }
    Err(TheoryError::NoConvergence {
        iterations: ctl.max_fp_iters,
        last: r,
    })
}

/// Weights at a given `r0` (not necessarily the fixed point).
pub fn weights_at(k: usize, alpha: f64, nu: f64, r0: f64, n_max: Option<usize>, ctl: &SeriesControl) -> Result<(FieldWeights, BigI), TheoryError> {
    let c = coefficients(k, alpha, nu, r0);
    let bi = big_i(c.z, nu, ctl)?;
    let log_i = bi.value.ln();
    // z e^{nu/2} / 2 plays the role of the Poisson parameter
    let lam = 0.5 * c.z * (0.5 * nu).exp();
    let n_max = n_max.unwrap_or_else(|| default_n_max(lam));
    let mut weights = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lw = 0.5 * nu * n as f64 + log_bessel_i(n as i64, c.z, ctl)? - log_i;
        weights.push(lw.exp());
    }
    // r_{n+1}/r_n < e^{nu/2} z / (2(n+1))
    let q = lam / (n_max + 1) as f64;
    let tail = if q < 1.0 {
        2.0 * weights[n_max] * q / (1.0 - q)
    } else {
        f64::INFINITY
    };
    Ok((FieldWeights { weights, tail }, bi))
}

pub fn solve_finite_nu(k: usize, alpha: f64, nu: f64, n_max: Option<usize>, ctl: &SeriesControl) -> Result<FiniteNuSolution, TheoryError> {
    let (r0, iterations) = solve_r0(k, alpha, nu, ctl)?;
    let (weights, bi) = weights_at(k, alpha, nu, r0, n_max, ctl)?;
    Ok(FiniteNuSolution {
        k,
        alpha,
        nu,
        r0,
        coeffs: coefficients(k, alpha, nu, r0),
        big_i: bi,
        iterations,
        weights,
    })
}

/// `F = -z I'(z,nu)/I(z,nu) + ln I(z,nu) + alpha ln D` at an arbitrary `r0`.
pub fn free_energy_at(k: usize, alpha: f64, nu: f64, r0: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    let c = coefficients(k, alpha, nu, r0);
    let bi = big_i(c.z, nu, ctl)?;
    Ok(-c.z * bi.dz / bi.value + bi.value.ln() + alpha * c.d.ln())
}

/// `F(nu)` at the solved `r0`.
pub fn free_energy(k: usize, alpha: f64, nu: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    let (r0, _) = solve_r0(k, alpha, nu, ctl)?;
    free_energy_at(k, alpha, nu, r0, ctl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GsEnergy {
    /// `-dF/dnu`, central differences at `h = 1e-4 nu` and `h/2` combined by
    /// Richardson extrapolation, `r0` re-solved at every point.
    pub finite_difference: f64,
    /// `-d ln I/dnu` at fixed `z` plus the explicit `nu`-dependence:
    /// `sum_{n>=1} n r_n + alpha K w^{K-1} (1+r0)/(4D) + alpha (1 - K/2) w^K e^{-nu}/D`.
    pub fixed_z: f64,
    /// First order in `e^{-nu}` built from the satisfiable limit.
    pub closed_form: f64,
    /// `(gamma/K) e^{-nu}`.
    pub large_alpha: f64,
}

fn closed_form(k: usize, alpha: f64, nu: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    let r = solve_rho0(k, alpha, ctl)?;
    let (g, rho) = (r.gamma_big, r.rho0);
    let kf = k as f64;
    let eps = (-nu).exp();
    // s = rho0 e^G
    let s = 1.0 / (2.0 - (-g).exp());
    let brace = -g * g * rho * (1.0 - rho) / (alpha * kf) - ((-g).exp() - 1.0 + g) + 2.0 * g * s - rho * (g * g + 2.0 * g)
        + (2.0 / kf - 1.0) * 0.5 * (1.0 - rho) / s;
    Ok(eps * g * s * brace)
}

pub fn gs_energy(k: usize, alpha: f64, nu: f64, ctl: &SeriesControl) -> Result<GsEnergy, TheoryError> {
    let sol = solve_finite_nu(k, alpha, nu, None, ctl)?;
    let kf = k as f64;
    let c = sol.coeffs;
    let d = |h: f64| -> Result<f64, TheoryError> {
        Ok(-(free_energy(k, alpha, nu + h, ctl)? - free_energy(k, alpha, nu - h, ctl)?) / (2.0 * h))
    };
    let h = 1e-4 * nu;
    let finite_difference = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
    let moment: f64 = sol.weights.weights.iter().enumerate().skip(1).map(|(n, r)| n as f64 * r).sum();
    let fixed_z = -moment + 0.25 * alpha * kf * c.w.powi(k as i32 - 1) * (1.0 + sol.r0) / c.d
        + alpha * (1.0 - 0.5 * kf) * c.w.powi(k as i32) * (-nu).exp() / c.d;
    Ok(GsEnergy {
        finite_difference,
        fixed_z,
        closed_form: closed_form(k, alpha, nu, ctl)?,
        large_alpha: small_gamma(k, alpha) / kf * (-nu).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::infinite::{field_weights_inf, omega0};

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn normalization() {
        for &nu in &[2.0, 5.0, 10.0] {
            let s = solve_finite_nu(3, 10.0, nu, None, &ctl()).unwrap();
            assert!((s.weights.total() - 1.0).abs() < 1e-10, "nu={nu}: {}", s.weights.total());
            assert!((s.weights.weights[0] - s.r0).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_values() {
        // high-precision independent evaluation at alpha = 10
        for &(nu, r0, f) in &[(2.0, 0.026788, -0.49306), (5.0, 0.008281, -0.64089), (10.0, 0.0074965, -0.64928)] {
            let s = solve_finite_nu(3, 10.0, nu, None, &ctl()).unwrap();
            assert!((s.r0 - r0).abs() / r0 < 1e-4, "nu={nu}: r0 {}", s.r0);
            let fe = free_energy(3, 10.0, nu, &ctl()).unwrap();
            assert!((fe - f).abs() < 1e-5, "nu={nu}: F {fe}");
        }
    }

    #[test]
    fn large_nu_limit() {
        let s = solve_finite_nu(3, 10.0, 40.0, None, &ctl()).unwrap();
        let inf = field_weights_inf(3, 10.0, Some(s.weights.n_max()), &ctl()).unwrap();
        for n in 0..=s.weights.n_max() {
            assert!((s.weights.weights[n] - inf.weights[n]).abs() < 1e-6);
        }
        let f = free_energy(3, 10.0, 40.0, &ctl()).unwrap();
        assert!((f - omega0(3, 10.0, &ctl()).unwrap().exact).abs() < 1e-6);
    }

    #[test]
    fn bessel_ratio() {
        // r_{n+1}/r_n = e^{nu/2} I_{n+1}(z)/I_n(z), and the Bessel recurrence
        // I_{n-1} - I_{n+1} = (2n/z) I_n gives
        // e^{nu/2} r_{n-1} - e^{-nu/2} r_{n+1} = (2n/z) r_n
        let s = solve_finite_nu(3, 10.0, 5.0, None, &ctl()).unwrap();
        let (z, e) = (s.coeffs.z, (0.5f64 * 5.0).exp());
        let r = &s.weights.weights;
        for n in 1..10 {
            let lhs = e * r[n - 1] - r[n + 1] / e;
            let rhs = 2.0 * n as f64 / z * r[n];
            assert!((lhs - rhs).abs() < 1e-10 * rhs, "n={n}");
        }
    }

    #[test]
    fn e0_routes() {
        for &(a, nu, e0) in &[(10.0, 5.0, 8.418e-3), (10.0, 8.0, 4.2238e-4), (20.0, 5.0, 1.9167e-2), (20.0, 8.0, 9.5574e-4)] {
            let g = gs_energy(3, a, nu, &ctl()).unwrap();
            assert!((g.finite_difference - e0).abs() / e0 < 1e-3, "alpha={a} nu={nu}: {g:?}");
            assert!((g.finite_difference - g.fixed_z).abs() / e0 < 1e-7, "alpha={a} nu={nu}: {g:?}");
        }
        // the first-order closed form approaches the total derivative as alpha grows
        let gap = |a: f64| {
            let g = gs_energy(3, a, 8.0, &ctl()).unwrap();
            (g.closed_form - g.finite_difference).abs() / g.finite_difference
        };
        assert!(gap(30.0) < gap(20.0) && gap(20.0) < gap(10.0));
        let g = gs_energy(3, 20.0, 8.0, &ctl()).unwrap();
        assert!((g.closed_form - 9.468e-4).abs() < 1e-6);
    }

    #[test]
    fn free_energy_is_not_stationary_in_r0() {
        let (r0, _) = solve_r0(3, 10.0, 5.0, &ctl()).unwrap();
        let h = 1e-6;
        let d = (free_energy_at(3, 10.0, 5.0, r0 + h, &ctl()).unwrap() - free_energy_at(3, 10.0, 5.0, r0 - h, &ctl()).unwrap()) / (2.0 * h);
        assert!(d.abs() > 1.0, "{d}");
    }

    #[test]
    fn alpha_zero_boundary() {
        assert_eq!(free_energy(3, 0.0, 3.0, &ctl()).unwrap(), 0.0);
        assert!(matches!(solve_r0(3, 10.0, 0.0, &ctl()), Err(TheoryError::NonPositiveNu { .. })));
    }
}
