//! Scalar special functions and quadrature.
//!
//! Everything here is a pure function of its arguments.

mod hyp3f2;
mod quadrature;

pub use hyp3f2::{
    hyp3f2_accelerated, hyp3f2_unit, hyp3f2_unit_with, ln_hyp3f2_accelerated, Hyp3F2Params,
    SeriesConfig,
};
pub use quadrature::{
    integrate_beta_weighted_log, integrate_positive_quadrant, integrate_positive_quadrant_log,
    integrate_positive_quadrant_with, integrate_unit_interval, integrate_unit_interval_log,
    integrate_unit_interval_with, Mode, QuadConfig,
};

use crate::error::{domain, Result};

/// Natural log of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Log of the rising factorial `a (a+1) ... (a+n-1)`.
pub fn log_pochhammer(a: f64, n: u64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("log_pochhammer needs a > 0, got {a}"));
    }
    Ok(ln_poch(a, n))
}

/// Unchecked variant of [`log_pochhammer`] for hot loops. Requires `a > 0`.
#[inline]
pub(crate) fn ln_poch(a: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n > 48 {
        return ln_gamma(a + n as f64) - ln_gamma(a);
    }
    let mut acc = 0.0;
    let mut prod = 1.0;
    for j in 0..n {
        prod *= a + j as f64;
        if prod > 1e280 {
            acc += prod.ln();
            prod = 1.0;
        }
    }
    acc + prod.ln()
}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
#[inline]
pub(crate) fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Stable `ln(exp(a) + exp(b))`.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Stable log-sum-exp of a slice; `-inf` for an empty slice.
pub(crate) fn ln_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_empty_product() {
        assert_eq!(log_pochhammer(3.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn pochhammer_factorial() {
        assert!((log_pochhammer(1.0, 4).unwrap() - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn pochhammer_direct_product() {
        let want = (2.5f64 * 3.5 * 4.5).ln();
        assert!((log_pochhammer(2.5, 3).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn pochhammer_rejects_nonpositive() {
        assert!(log_pochhammer(0.0, 2).is_err());
        assert!(log_pochhammer(-1.5, 2).is_err());
    }

    #[test]
    fn pochhammer_branches_agree() {
        for &a in &[0.3, 1.0, 7.25, 120.0] {
            let direct: f64 = (0..48).map(|j| (a + j as f64).ln()).sum();
            assert!((ln_poch(a, 48) - direct).abs() < 1e-11 * direct.abs().max(1.0));
            let direct49 = direct + (a + 48.0).ln();
            assert!((ln_poch(a, 49) - direct49).abs() < 1e-11 * direct49.abs().max(1.0));
        }
    }

    #[test]
    fn log_sum_helpers() {
        assert!((ln_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((ln_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(xlny(0.0, 0.0), 0.0);
    }
}
