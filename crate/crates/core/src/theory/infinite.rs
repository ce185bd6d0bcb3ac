//! Quantities of the satisfiable (`nu -> inf`) limit.

use serde::Serialize;
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma_lr;

use super::{SeriesControl, TheoryError};

pub(crate) fn check_k_alpha(k: usize, alpha: f64) -> Result<(), TheoryError> {
    if k < 2 {
        return Err(TheoryError::Domain(format!("K must be at least 2, got {k}")));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(TheoryError::Domain(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// `Gamma(rho) = (alpha K / 2) w^{K-1} / (1 - w^K)` with `w = (1 - rho)/2`.
pub fn big_gamma(k: usize, alpha: f64, rho: f64) -> f64 {
    let w = 0.5 * (1.0 - rho);
    0.5 * alpha * k as f64 * w.powi(k as i32 - 1) / (1.0 - w.powi(k as i32))
}

/// `1 / (2 e^G - 1)` without overflow.
pub(crate) fn zero_weight(g: f64) -> f64 {
    let e = (-g).exp();
    e / (2.0 - e)
}

/// `gamma = alpha K / (2^K - 1)`.
pub fn small_gamma(k: usize, alpha: f64) -> f64 {
    alpha * k as f64 / (2f64.powi(k as i32) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rho0 {
    pub rho0: f64,
    /// `Gamma(rho0)`.
    pub gamma_big: f64,
    /// False when no root below 1 exists and `rho0 = 1`.
    pub nontrivial: bool,
}

fn rho_residual(k: usize, alpha: f64, rho: f64) -> f64 {
    rho - zero_weight(big_gamma(k, alpha, rho))
}

/// Smallest root in `(0, 1)` of `rho = 1/(2 e^{Gamma(rho)} - 1)`, or `1`
/// (always a root) when there is none.
///
/// The residual is negative at 0. A scan over a logarithmic grid near 0 and a
/// linear grid up to 1 finds the first sign change, which is then bisected to
/// relative precision `ctl.fixed_point_tol`.
pub fn solve_rho0(k: usize, alpha: f64, ctl: &SeriesControl) -> Result<Rho0, TheoryError> {
    check_k_alpha(k, alpha)?;
    if alpha == 0.0 {
        return Ok(Rho0 {
            rho0: 1.0,
            gamma_big: 0.0,
            nontrivial: false,
        });
    }
    let g = |r: f64| rho_residual(k, alpha, r);
    let log_grid = (0..=3000).map(|j| 10f64.powf(-300.0 + 297.0 * j as f64 / 3000.0));
    let lin_grid = (1..=5000).map(|j| 1e-3 + (1.0 - 1e-9 - 1e-3) * j as f64 / 5000.0);
    let mut grid = log_grid.chain(lin_grid);
    let mut lo = grid.next().expect("grid is nonempty");
    assert!(g(lo) < 0.0, "residual must be negative near 0");
    let mut bracket = None;
    for x in grid {
        if g(x) >= 0.0 {
            bracket = Some((lo, x));
            break;
        }
        lo = x;
    }
    let Some((mut a, mut b)) = bracket else {
        return Ok(Rho0 {
            rho0: 1.0,
            gamma_big: big_gamma(k, alpha, 1.0),
            nontrivial: false,
        });
    };
    for _ in 0..400 {
        if b - a <= ctl.fixed_point_tol * b.abs() * 1e-3 {
            break;
        }
        let mid = 0.5 * (a + b);
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let rho0 = 0.5 * (a + b);
    Ok(Rho0 {
        rho0,
        gamma_big: big_gamma(k, alpha, rho0),
        nontrivial: true,
    })
}

/// Symmetric integer-field weights `p(n) = p(-n)`; `weights[n]` for
/// `0 <= n <= n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldWeights {
    pub weights: Vec<f64>,
    /// Total mass (both signs) of `|n| > n_max`.
    pub tail: f64,
}

impl FieldWeights {
    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weight(&self, n: i64) -> f64 {
        self.weights.get(n.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// `sum_{|n| <= n_max} p(n)`.
    pub fn mass(&self) -> f64 {
        self.weights[0] + 2.0 * self.weights[1..].iter().sum::<f64>()
    }

    /// `mass + tail`; 1 for a normalized distribution.
    pub fn total(&self) -> f64 {
        self.mass() + self.tail
    }

    /// Mean of `|n|` restricted to `n != 0`, within the window.
    pub fn mean_abs_nonzero(&self) -> f64 {
        let num: f64 = self.weights.iter().enumerate().skip(1).map(|(n, w)| n as f64 * w).sum();
        let den: f64 = self.weights[1..].iter().sum();
        num / den
    }

    /// Total-variation distance `(1/2) sum_n |p(n) - q(n)|`, tails included
    /// as an upper bound.
    pub fn tv_distance(&self, other: &FieldWeights) -> f64 {
        let n = self.weights.len().max(other.weights.len());
        let mut s = 0.0;
        for j in 0..n {
            let d = (self.weight(j as i64) - other.weight(j as i64)).abs();
            s += if j == 0 { d } else { 2.0 * d };
        }
        0.5 * (s + self.tail + other.tail)
    }
}

/// `ceil(G + 10 sqrt(G)) + 10`.
pub fn default_n_max(g: f64) -> usize {
    (g + 10.0 * g.sqrt()).ceil() as usize + 10
}

/// `c * lam^n / n!` for `n = 0..=n_max`, `c = exp(log_c)`, plus the mass of
/// both tails `2 c e^lam P(X > n_max)`, `X ~ Poisson(lam)`.
fn two_sided_poisson(lam: f64, log_c: f64, n0: f64, n_max: usize) -> FieldWeights {
    let mut weights: Vec<f64> = (0..=n_max)
        .map(|n| {
            if n == 0 {
                n0
            } else if lam == 0.0 {
                0.0
            } else {
                (log_c + n as f64 * lam.ln() - ln_factorial(n as u64)).exp()
            }
        })
        .collect();
    if weights.is_empty() {
        weights.push(n0);
    }
    let tail = if lam == 0.0 {
        0.0
    } else {
        2.0 * (log_c + lam).exp() * gamma_lr(n_max as f64 + 1.0, lam)
    };
    FieldWeights { weights, tail }
}

/// `rho_n = Gamma^{|n|}/|n|! * rho0` at the solved `rho0`.
pub fn field_weights_inf(k: usize, alpha: f64, n_max: Option<usize>, ctl: &SeriesControl) -> Result<FieldWeights, TheoryError> {
    let r = solve_rho0(k, alpha, ctl)?;
    let g = r.gamma_big;
    let n_max = n_max.unwrap_or_else(|| default_n_max(g));
    let rho0 = zero_weight(g);
    // ln rho0 = -G - ln(2 - e^{-G})
    let log_rho0 = -g - (2.0 - (-g).exp()).ln();
    if !r.nontrivial {
        // rho0 = 1 and every field vanishes
        let mut w = vec![0.0; n_max + 1];
        w[0] = 1.0;
        return Ok(FieldWeights { weights: w, tail: 0.0 });
    }
    Ok(two_sided_poisson(g, log_rho0, rho0, n_max))
}

/// Field distribution of the planted ensemble seen from the root:
/// `e^{-gamma}` at zero and `gamma^{|n|} e^{-gamma} / (2 |n|!)` elsewhere.
pub fn planted_field_dist(k: usize, alpha: f64, n_max: Option<usize>) -> Result<FieldWeights, TheoryError> {
    check_k_alpha(k, alpha)?;
    let g = small_gamma(k, alpha);
    let n_max = n_max.unwrap_or_else(|| default_n_max(g));
    Ok(two_sided_poisson(g, -g - 2f64.ln(), (-g).exp(), n_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Omega0 {
    /// `ln(2e^G - 1) - 2 G e^G/(2e^G - 1) + alpha ln(1 - w^K)`.
    pub exact: f64,
    /// `ln 2 + alpha ln(1 - 2^{-K}) + gamma e^{-gamma} / 2`.
    pub approx: f64,
    pub gap: f64,
}

pub fn omega0(k: usize, alpha: f64, ctl: &SeriesControl) -> Result<Omega0, TheoryError> {
    let r = solve_rho0(k, alpha, ctl)?;
    let g = r.gamma_big;
    let w = 0.5 * (1.0 - r.rho0);
    let e = (-g).exp();
    // 2 G e^G / (2 e^G - 1) = 2 G / (2 - e^{-G})
    let exact = g + (2.0 - e).ln() - 2.0 * g / (2.0 - e) + alpha * (1.0 - w.powi(k as i32)).ln();
    let gam = small_gamma(k, alpha);
    let approx = 2f64.ln() + alpha * (1.0 - 2f64.powi(-(k as i32))).ln() + 0.5 * gam * (-gam).exp();
    Ok(Omega0 {
        exact,
        approx,
        gap: (exact - approx).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeEntropy {
    /// Lower end of the range of `sigma / N`.
    pub lo: f64,
    pub hi: f64,
    /// `gamma e^{-gamma} / 2`.
    pub leading: f64,
}

impl RelativeEntropy {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// `sigma/N = -omega(0) + alpha ln(1 - 2^{-K}) + ln 2 - s` where the entropy
/// `s` of solutions per variable lies in `[0, rho0 ln 2]`.
pub fn relative_entropy_per_var(k: usize, alpha: f64, ctl: &SeriesControl) -> Result<RelativeEntropy, TheoryError> {
    let om = omega0(k, alpha, ctl)?;
    let r = solve_rho0(k, alpha, ctl)?;
    let hi = -om.exact + alpha * (1.0 - 2f64.powi(-(k as i32))).ln() + 2f64.ln();
    let gam = small_gamma(k, alpha);
    Ok(RelativeEntropy {
        lo: hi - r.rho0 * 2f64.ln(),
        hi,
        leading: 0.5 * gam * (-gam).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cavity {
    pub rho0: f64,
    pub w: f64,
    /// `q = w^{K-1}`.
    pub q: f64,
    /// `alpha' = alpha / (1 - w^K)`.
    pub alpha_prime: f64,
    pub gamma_big: f64,
}

pub fn cavity(k: usize, alpha: f64, ctl: &SeriesControl) -> Result<Cavity, TheoryError> {
    let r = solve_rho0(k, alpha, ctl)?;
    let w = 0.5 * (1.0 - r.rho0);
    Ok(Cavity {
        rho0: r.rho0,
        w,
        q: w.powi(k as i32 - 1),
        alpha_prime: alpha / (1.0 - w.powi(k as i32)),
        gamma_big: r.gamma_big,
    })
}

/// Which first-order correction to apply on top of the satisfiable limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BiasMode {
    Satisfiable,
    Nu(f64),
    Energy(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasTheory {
    /// `(<l+> - <l->) / (<l+> + <l->)` among variables with positive field.
    pub exact: f64,
    pub ell_plus: f64,
    pub ell_minus: f64,
    /// `1 / (2^K - 1)`.
    pub leading: f64,
    /// First-order value in `e^{-nu}` or in the energy density.
    pub corrected: Option<f64>,
    /// Set when the energy density is not small against `2^{1-K}/K`.
    pub outside_validity: bool,
}

/// Occurrence bias of variables with positive field.
///
/// `<l+> = (alpha' K/2) (1 - (1-q) e^{-G}) / (1 - e^{-G})` and
/// `<l-> = (alpha' K/2)(1 - q)`. For finite `nu` the correction is
/// `-alpha K e^{-nu} / (2 (2^K-1)^2)`; for energy density `e` the value is
/// `(1 - e K 2^K (1/2 - 1/(2^{K+1}-2) - 2^K/(alpha K))) / (2^K - 1)`.
pub fn bias_theory(k: usize, alpha: f64, mode: BiasMode, ctl: &SeriesControl) -> Result<BiasTheory, TheoryError> {
    let c = cavity(k, alpha, ctl)?;
    let kf = k as f64;
    let p = 2f64.powi(k as i32);
    let leading = 1.0 / (p - 1.0);
    let half = 0.5 * c.alpha_prime * kf;
    let ell_minus = half * (1.0 - c.q);
    let ell_plus = if c.gamma_big > 0.0 {
        let e = (-c.gamma_big).exp();
        half * (1.0 - (1.0 - c.q) * e) / (1.0 - e)
    } else {
        half
    };
    let exact = (ell_plus - ell_minus) / (ell_plus + ell_minus);
    let (corrected, outside_validity) = match mode {
        BiasMode::Satisfiable => (None, false),
        BiasMode::Nu(nu) => {
            if nu.is_nan() || nu <= 0.0 {
                return Err(TheoryError::NonPositiveNu { nu });
            }
            (Some(leading - alpha * kf / (2.0 * (p - 1.0).powi(2)) * (-nu).exp()), false)
        }
        BiasMode::Energy(e) => {
            if e.is_nan() || e < 0.0 {
                return Err(TheoryError::Domain(format!("energy density must be >= 0, got {e}")));
            }
            let v = leading * (1.0 - e * kf * p * (0.5 - 1.0 / (2.0 * p - 2.0) - p / (alpha * kf)));
            (Some(v), e >= 2f64.powi(1 - k as i32) / kf)
        }
    };
    Ok(BiasTheory {
        exact,
        ell_plus,
        ell_minus,
        leading,
        corrected,
        outside_validity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccurrenceGf {
    pub g: f64,
    /// `e^{alpha K (x - 1)}`.
    pub poisson: f64,
}

/// `G(x) = e^{alpha' K (x-1)(1-q)} (2 e^{alpha' K x q/2} - 1) / (2 e^{alpha' K q/2} - 1)`.
pub fn occurrence_gf(k: usize, alpha: f64, x: f64, ctl: &SeriesControl) -> Result<OccurrenceGf, TheoryError> {
    let c = cavity(k, alpha, ctl)?;
    let a = c.alpha_prime * k as f64;
    let h = 0.5 * a * c.q;
    // ratio of (2e^{hx} - 1) / (2e^{h} - 1) evaluated as e^{h(x-1)} (2 - e^{-hx}) / (2 - e^{-h})
    let ratio = if h > 0.0 {
        (h * (x - 1.0)).exp() * (2.0 - (-h * x).exp()) / (2.0 - (-h).exp())
    } else {
        1.0
    };
    Ok(OccurrenceGf {
        g: (a * (x - 1.0) * (1.0 - c.q)).exp() * ratio,
        poisson: (alpha * k as f64 * (x - 1.0)).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonIntegerCheck {
    pub root_exists: bool,
    pub y_root: Option<f64>,
    /// `alpha K (1/2 - w) w^{K-2} / (1 - w^K)`.
    pub rhs: f64,
    /// `1 / (K - 1)`, the infimum of the left side.
    pub lhs_at_zero: f64,
}

fn lhs(k: usize, y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0 / (k as f64 - 1.0);
    }
    // 1 - (1-y)^{K-1} without cancellation at small y
    y / -((k as f64 - 1.0) * (-y).ln_1p()).exp_m1()
}

/// Looks for `y in (0, 1]` with `y / (1 - (1-y)^{K-1}) = rhs`. The left side
/// increases from `1/(K-1)` at `0+` to 1 at `y = 1`.
pub fn noninteger_check(k: usize, alpha: f64, ctl: &SeriesControl) -> Result<NonIntegerCheck, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!("the check needs K >= 3, got {k}")));
    }
    let c = cavity(k, alpha, ctl)?;
    let w = c.w;
    let rhs = alpha * k as f64 * (0.5 - w) * w.powi(k as i32 - 2) / (1.0 - w.powi(k as i32));
    let lo_val = 1.0 / (k as f64 - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let y_root = if rhs > lo_val && rhs <= 1.0 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if lhs(k, mid) < rhs {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    } else {
        None
    };
    Ok(NonIntegerCheck {
        root_exists: y_root.is_some(),
        y_root,
        rhs,
        lhs_at_zero: lo_val,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaScan {
    /// `(alpha, root exists)` on the grid.
    pub grid: Vec<(f64, bool)>,
    /// `[alpha with a root, next alpha without]`, narrowed by bisection
    /// around the largest grid point with a root.
    pub alpha_s_bracket: Option<(f64, f64)>,
}

/// Evaluates [`noninteger_check`] on `grid` (ascending) and brackets the
/// largest `alpha` with a root.
pub fn alpha_s_scan(k: usize, grid: &[f64], ctl: &SeriesControl) -> Result<AlphaScan, TheoryError> {
    let mut pts = Vec::with_capacity(grid.len());
    for &a in grid {
        pts.push((a, noninteger_check(k, a, ctl)?.root_exists));
    }
    let last = pts.iter().rposition(|p| p.1);
    let bracket = match last {
        Some(i) if i + 1 < pts.len() => {
            let (mut lo, mut hi) = (pts[i].0, pts[i + 1].0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if noninteger_check(k, mid, ctl)?.root_exists {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some((lo, hi))
        }
        _ => None,
    };
    Ok(AlphaScan {
        grid: pts,
        alpha_s_bracket: bracket,
    })
}
