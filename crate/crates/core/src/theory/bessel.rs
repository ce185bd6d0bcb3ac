//! Modified Bessel functions of integer order and the weighted sums built
//! from them.

use statrs::function::factorial::ln_factorial;

use super::{SeriesControl, TheoryError};

/// Largest argument accepted by the series (`e^z` must stay finite).
pub const MAX_BESSEL_ARG: f64 = 600.0;

/// `ln I_n(z)` for `z >= 0`, from the power series
/// `sum_m (z/2)^(2m+n) / (m! (m+n)!)` with the leading factor taken out.
///
/// `I_{-n} = I_n`, so only `|n|` matters. Returns `-inf` for `z = 0, n != 0`.
pub fn log_bessel_i(n: i64, z: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    if z.is_nan() || z < 0.0 {
        return Err(TheoryError::Domain(format!("Bessel argument must be >= 0, got {z}")));
    }
    if z > MAX_BESSEL_ARG {
        return Err(TheoryError::BesselOverflow { z });
    }
    let n = n.unsigned_abs();
    if z == 0.0 {
        return Ok(if n == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let t = 0.25 * z * z;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut m = 0u64;
    loop {
        m += 1;
        if m as usize > ctl.max_terms {
            return Err(TheoryError::SeriesLimit {
                what: "Bessel series",
                terms: ctl.max_terms,
            });
        }
        term *= t / (m as f64 * (m + n) as f64);
        sum += term;
        // terms grow until m ~ z/2, then fall off faster than geometrically
        let ratio_next = t / ((m + 1) as f64 * (m + 1 + n) as f64);
        if ratio_next < 1.0 && term * ratio_next / (1.0 - ratio_next) < ctl.rel_tol * sum {
            break;
        }
    }
    Ok(n as f64 * (0.5 * z).ln() - ln_factorial(n) + sum.ln())
}

/// `I_n(z)`.
pub fn bessel_i(n: i64, z: f64, ctl: &SeriesControl) -> Result<f64, TheoryError> {
    Ok(log_bessel_i(n, z, ctl)?.exp())
}

/// `I(z, nu) = sum_n e^{nu |n| / 2} I_n(z)` and its `z`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigI {
    pub value: f64,
    pub dz: f64,
    /// Orders `n >= 1` summed.
    pub terms: usize,
    /// Bound on the neglected part of the `n >= 1` sum in `value`.
    pub truncation: f64,
}

/// Evaluates `I(z, nu)` through the rapidly converging form
/// `2 e^{z cosh(nu/2)} - I_0(z) - 2 sum_{n>=1} e^{-nu n/2} I_n(z)`
/// and, from the same terms,
/// `I' = 2 cosh(nu/2) e^{z cosh(nu/2)} - e^{-nu/2} I_0(z)
///       - 2 cosh(nu/2) sum_{n>=1} e^{-nu n/2} I_n(z)`.
pub fn big_i(z: f64, nu: f64, ctl: &SeriesControl) -> Result<BigI, TheoryError> {
    if nu.is_nan() || nu <= 0.0 {
        return Err(TheoryError::NonPositiveNu { nu });
    }
    let c = (0.5 * nu).cosh();
    let lead = 2.0 * (z * c).exp();
    if !lead.is_finite() {
        return Err(TheoryError::BesselOverflow { z: z * c });
    }
    let i0 = bessel_i(0, z, ctl)?;
    let mut tail = 0.0;
    let mut n = 0usize;
    let mut truncation = 0.0;
    if z > 0.0 {
        loop {
            n += 1;
            if n > ctl.max_terms {
                return Err(TheoryError::SeriesLimit {
                    what: "I(z, nu) series",
                    terms: ctl.max_terms,
                });
            }
            let term = (log_bessel_i(n as i64, z, ctl)? - 0.5 * nu * n as f64).exp();
            tail += term;
            // I_{n+1}/I_n < z / (2(n+1))
            let q = (-0.5 * nu).exp() * z / (2.0 * (n + 1) as f64);
            if q < 1.0 {
                let bound = term * q / (1.0 - q);
                if bound <= ctl.rel_tol * (lead - i0 - 2.0 * tail).abs() {
                    truncation = 2.0 * bound;
                    break;
                }
            }
        }
    }
    Ok(BigI {
        value: lead - i0 - 2.0 * tail,
        dz: c * lead - (-0.5 * nu).exp() * i0 - 2.0 * c * tail,
        terms: n,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(1/pi) int_0^pi e^{z cos t} cos(n t) dt`, composite trapezoid. The
    /// integrand is smooth and periodic, so the rule converges geometrically.
    fn bessel_quad(n: i64, z: f64) -> f64 {
        let steps = 4000;
        let h = std::f64::consts::PI / steps as f64;
        let f = |t: f64| (z * t.cos()).exp() * (n as f64 * t).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for j in 1..steps {
            s += f(j as f64 * h);
        }
        s * h / std::f64::consts::PI
    }

    /// `sum_{|n| <= 200} e^{nu |n|/2} I_n(z)` term by term.
    fn direct_big_i(z: f64, nu: f64) -> f64 {
        let ctl = SeriesControl::default();
        (-200i64..=200)
            .map(|n| (0.5 * nu * n.abs() as f64 + log_bessel_i(n, z, &ctl).unwrap()).exp())
            .sum()
    }

    #[test]
    fn values_at_zero() {
        let ctl = SeriesControl::default();
        assert_eq!(bessel_i(0, 0.0, &ctl).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0, &ctl).unwrap(), 0.0);
        let b = big_i(0.0, 3.0, &ctl).unwrap();
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn i0_of_one() {
        let ctl = SeriesControl::default();
        let v = bessel_i(0, 1.0, &ctl).unwrap();
        // the series stops once the remainder drops below rel_tol
        assert!((v - 1.266_065_877_752_008_4).abs() < ctl.rel_tol * v, "{v:e}");
        let tight = SeriesControl { rel_tol: 1e-17, ..ctl };
        let v = bessel_i(0, 1.0, &tight).unwrap();
        assert!((v - 1.266_065_877_752_008_4).abs() < 1e-15, "{v:e}");
        assert!((v - bessel_quad(0, 1.0)).abs() < 1e-13);
    }

    #[test]
    fn series_matches_quadrature() {
        let ctl = SeriesControl::default();
        for &z in &[0.01, 0.5, 2.0, 7.5, 20.0] {
            for n in 0..12 {
                let s = bessel_i(n, z, &ctl).unwrap();
                let q = bessel_quad(n, z);
                // the quadrature carries absolute rounding error of order eps * e^z
                assert!((s - q).abs() <= 1e-12 * q + 1e-15 * z.exp(), "n={n} z={z}: {s} vs {q}");
                assert_eq!(s, bessel_i(-n, z, &ctl).unwrap());
            }
        }
    }

    #[test]
    fn recurrence() {
        // I_{n-1} - I_{n+1} = (2n/z) I_n
        let ctl = SeriesControl::default();
        for &z in &[0.3, 4.0, 15.0] {
            for n in 1..20 {
                let l = bessel_i(n - 1, z, &ctl).unwrap() - bessel_i(n + 1, z, &ctl).unwrap();
                let r = 2.0 * n as f64 / z * bessel_i(n, z, &ctl).unwrap();
                assert!((l - r).abs() <= 1e-12 * r.abs(), "n={n} z={z}");
            }
        }
    }

    #[test]
    fn deep_orders_stay_in_log_domain() {
        let ctl = SeriesControl::default();
        let l = log_bessel_i(60, 1e-8, &ctl).unwrap();
        assert!(l.is_finite() && l < -1000.0);
        assert!(matches!(
            log_bessel_i(0, 1e4, &ctl),
            Err(TheoryError::BesselOverflow { .. })
        ));
    }

    #[test]
    fn fast_series_matches_direct_sum() {
        let ctl = SeriesControl::default();
        for &(z, nu) in &[(0.5, 1.0), (2.0, 2.0), (1.2, 5.0), (0.05, 8.0), (4.0, 0.5)] {
            let b = big_i(z, nu, &ctl).unwrap();
            let d = direct_big_i(z, nu);
            assert!(((b.value - d) / d).abs() < 1e-10, "z={z} nu={nu}: {} vs {d}", b.value);
            let h = 1e-5 * z;
            let fd = (big_i(z + h, nu, &ctl).unwrap().value - big_i(z - h, nu, &ctl).unwrap().value) / (2.0 * h);
            assert!(((b.dz - fd) / fd).abs() < 1e-7, "dz z={z} nu={nu}");
        }
        assert!(matches!(big_i(1.0, 0.0, &ctl), Err(TheoryError::NonPositiveNu { .. })));
    }

    #[test]
    fn large_nu_is_dominated_by_the_exponential() {
        let ctl = SeriesControl::default();
        let z = 1e-6;
        let nu = 30.0;
        let b = big_i(z, nu, &ctl).unwrap();
        let lead = 2.0 * (z * (0.5 * nu).cosh()).exp() - bessel_i(0, z, &ctl).unwrap();
        assert!(((b.value - lead) / lead).abs() < 1e-12);
    }
}
