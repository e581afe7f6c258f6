//! Tanh-sinh quadrature on (0,1) and (0,∞)².
//!
//! Nodes are stored with both `x` and `1 - x` so integrands can be evaluated
//! near either endpoint without cancellation.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Node placement. `EndpointSingular` reaches about 1e-304 from the endpoints,
/// `Smooth` stops near 1e-15.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Smooth,
    EndpointSingular,
}

impl Mode {
    fn t_max(self) -> f64 {
        match self {
            Mode::Smooth => 3.6,
            Mode::EndpointSingular => 6.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Finest level; level `L` uses step `2^-L`.
    pub max_level: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_level: 10,
        }
    }
}

const MIN_LEVEL: usize = 3;
const TABLE_LEVELS: usize = 12;

#[derive(Clone, Copy)]
struct Node {
    t: f64,
    x: f64,
    xc: f64,
    w: f64,
}

/// Positive-abscissa nodes per level; the level-0 list includes t = 0.
fn table() -> &'static Vec<Vec<Node>> {
    static TABLE: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let t_max = Mode::EndpointSingular.t_max();
        let node = |t: f64| {
            let u = 0.5 * PI * t.sinh();
            let e = (-2.0 * u).exp();
            let x = 1.0 / (1.0 + e);
            let xc = e / (1.0 + e);
            Node {
                t,
                x,
                xc,
                w: PI * t.cosh() * x * xc,
            }
        };
        let mut levels = Vec::with_capacity(TABLE_LEVELS + 1);
        levels.push(
            (0..=t_max.floor() as usize)
                .map(|k| node(k as f64))
                .collect(),
        );
        for level in 1..=TABLE_LEVELS {
            let h = 0.5f64.powi(level as i32);
            let mut v = Vec::new();
            let mut i = 0usize;
            loop {
                let t = (2 * i + 1) as f64 * h;
                if t > t_max {
                    break;
                }
                v.push(node(t));
                i += 1;
            }
            levels.push(v);
        }
        levels
    })
}

fn check_cfg(cfg: &QuadConfig) -> Result<()> {
    if cfg.max_level < MIN_LEVEL || cfg.max_level > TABLE_LEVELS {
        return Err(Error::Domain(format!(
            "max_level must lie in [{MIN_LEVEL}, {TABLE_LEVELS}], got {}",
            cfg.max_level
        )));
    }
    if !(cfg.abs_tol >= 0.0 && cfg.rel_tol >= 0.0) || cfg.abs_tol + cfg.rel_tol == 0.0 {
        return Err(Error::Domain(
            "quadrature tolerances must be nonnegative and not both zero".into(),
        ));
    }
    Ok(())
}

/// Error estimate from the last three level values; digits roughly double
/// per level, so the newest difference is damped by the previous one.
fn error_estimate(i0: f64, i1: f64, i2: f64) -> f64 {
    let e1 = (i2 - i1).abs();
    let e2 = (i2 - i0).abs();
    let floor = 64.0 * f64::EPSILON * i2.abs();
    let est = if e1 == 0.0 {
        0.0
    } else if e2 > e1 {
        e1 * e1 / e2
    } else {
        e1
    };
    est.max(floor)
}

/// Integrate `f(x, 1 - x)` over (0,1).
pub fn integrate_unit_interval_with<F>(mut f: F, mode: Mode, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    check_cfg(cfg)?;
    let t_max = mode.t_max();
    let tab = table();
    let mut raw = 0.0f64;
    let mut history = [0.0f64; 3];
    for level in 0..=cfg.max_level {
        for n in tab[level].iter().take_while(|n| n.t <= t_max) {
            let right = f(n.x, n.xc);
            if !right.is_finite() {
                return Err(Error::NonFinite { at: n.x });
            }
            raw += n.w * right;
            if n.t > 0.0 {
                let left = f(n.xc, n.x);
                if !left.is_finite() {
                    return Err(Error::NonFinite { at: n.xc });
                }
                raw += n.w * left;
            }
        }
        let value = raw * 0.5f64.powi(level as i32);
        history = [history[1], history[2], value];
        if level >= MIN_LEVEL {
            let err = error_estimate(history[0], history[1], history[2]);
            if err <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
                return Ok(value);
            }
            if level == cfg.max_level {
                return Err(Error::Quadrature { value, error: err });
            }
        }
    }
    unreachable!()
}

/// Integrate `f` over (0,1) with default tolerances (1e-10).
pub fn integrate_unit_interval<F>(f: F, mode: Mode) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_unit_interval_with(|x, _| f(x), mode, &QuadConfig::default())
}

/// Log of `∫_0^1 exp(g(x, 1-x)) dx` for a log-integrand `g`; only the
/// relative tolerance applies. `g` may return `-inf` for zero.
pub fn integrate_unit_interval_log<G>(g: G, mode: Mode, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64, f64) -> f64,
{
    let (ln_value, err) = log_quadrature(g, mode, cfg)?;
    if err <= cfg.rel_tol {
        Ok(ln_value)
    } else {
        Err(Error::Quadrature {
            value: ln_value.exp(),
            error: err * ln_value.exp(),
        })
    }
}

/// Log-domain tanh-sinh returning the estimate and its relative error, which
/// exceeds `rel_tol` only when the level limit was hit.
fn log_quadrature<G>(mut g: G, mode: Mode, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    G: FnMut(f64, f64) -> f64,
{
    check_cfg(cfg)?;
    let t_max = mode.t_max();
    let tab = table();
    let mut top = f64::NEG_INFINITY;
    let mut sum = 0.0f64;
    let push = |v: f64, at: f64, top: &mut f64, sum: &mut f64| -> Result<()> {
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::NonFinite { at });
        }
        if v == f64::NEG_INFINITY {
            return Ok(());
        }
        if v > *top {
            *sum = *sum * (*top - v).exp() + 1.0;
            *top = v;
        } else {
            *sum += (v - *top).exp();
        }
        Ok(())
    };
    let mut history = [0.0f64; 3];
    for level in 0..=cfg.max_level {
        for n in tab[level].iter().take_while(|n| n.t <= t_max) {
            let lw = n.w.ln();
            push(lw + g(n.x, n.xc), n.x, &mut top, &mut sum)?;
            if n.t > 0.0 {
                push(lw + g(n.xc, n.x), n.xc, &mut top, &mut sum)?;
            }
        }
        if top == f64::NEG_INFINITY {
            if level >= MIN_LEVEL {
                return Ok((f64::NEG_INFINITY, 0.0));
            }
            continue;
        }
        let ln_value = top + sum.ln() - level as f64 * std::f64::consts::LN_2;
        history = [history[1], history[2], ln_value];
        if level >= MIN_LEVEL {
            // compare on a linear scale relative to the newest value
            let base = history[2];
            let err = error_estimate((history[0] - base).exp(), (history[1] - base).exp(), 1.0);
            if err <= cfg.rel_tol || level == cfg.max_level {
                return Ok((ln_value, err));
            }
        }
    }
    unreachable!()
}

/// Log of `∫_0^1 w^(a-1) (1-w)^(b-1) exp(g(ln w, ln(1-w))) dw` for smooth `g`.
///
/// Each half of the interval is mapped so that the power factor becomes
/// constant (`w = v^(1/a)/2` when `a < 1`, mirrored at the right end), which
/// keeps exponents close to -1 accurate. `g` sees logarithms so that powers
/// of `w` stay exact where `w` itself underflows.
pub fn integrate_beta_weighted_log<G>(a: f64, b: f64, mut g: G, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64, f64) -> f64,
{
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "beta weight exponents must be positive, got ({a}, {b})"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    let left = if a < 1.0 {
        let c = -a * ln2 - a.ln();
        integrate_unit_interval_log(
            |v, _| {
                let ln_w = v.ln() / a - ln2;
                let ln_wc = (-ln_w.exp()).ln_1p();
                c + (b - 1.0) * ln_wc + g(ln_w, ln_wc)
            },
            Mode::EndpointSingular,
            cfg,
        )?
    } else {
        integrate_unit_interval_log(
            |v, _| {
                let ln_w = (0.5 * v).ln();
                let ln_wc = (-0.5 * v).ln_1p();
                -ln2 + (a - 1.0) * ln_w + (b - 1.0) * ln_wc + g(ln_w, ln_wc)
            },
            Mode::EndpointSingular,
            cfg,
        )?
    };
    let right = if b < 1.0 {
        let c = -b * ln2 - b.ln();
        integrate_unit_interval_log(
            |v, _| {
                let ln_wc = v.ln() / b - ln2;
                let ln_w = (-ln_wc.exp()).ln_1p();
                c + (a - 1.0) * ln_w + g(ln_w, ln_wc)
            },
            Mode::EndpointSingular,
            cfg,
        )?
    } else {
        integrate_unit_interval_log(
            |v, vc| {
                let ln_wc = (0.5 * v).ln();
                let ln_w = (0.5 + 0.5 * vc).ln();
                -ln2 + (a - 1.0) * ln_w + (b - 1.0) * ln_wc + g(ln_w, ln_wc)
            },
            Mode::EndpointSingular,
            cfg,
        )?
    };
    Ok(super::ln_add_exp(left, right))
}

/// Integrate `f(u, v)` over (0,∞)² with target error 1e-8.
pub fn integrate_positive_quadrant<F>(f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let cfg = QuadConfig {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        max_level: 10,
    };
    integrate_positive_quadrant_with(f, &cfg)
}

/// Nested tanh-sinh after `u = t/(1-t)` on each axis; the inner integral is
/// solved to a tenth of the outer tolerance.
pub fn integrate_positive_quadrant_with<F>(f: F, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let inner_cfg = QuadConfig {
        abs_tol: 0.1 * cfg.abs_tol,
        rel_tol: 0.1 * cfg.rel_tol,
        max_level: TABLE_LEVELS.min(cfg.max_level + 1),
    };
    // an inner miss is tolerated when small against the largest node value
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let largest = RefCell::new(0.0f64);
    let worst_miss = RefCell::new(0.0f64);
    let outer = integrate_unit_interval_with(
        |x1, c1| {
            if failure.borrow().is_some() || c1 == 0.0 {
                return 0.0;
            }
            let u = x1 / c1;
            let inner = integrate_unit_interval_with(
                |x2, c2| {
                    if c2 == 0.0 {
                        0.0
                    } else {
                        f(u, x2 / c2) / c2 / c2
                    }
                },
                Mode::EndpointSingular,
                &inner_cfg,
            );
            let node = match inner {
                Ok(v) => v / c1 / c1,
                Err(Error::Quadrature { value, error }) => {
                    let miss = error / c1 / c1;
                    if miss > *worst_miss.borrow() {
                        *worst_miss.borrow_mut() = miss;
                    }
                    value / c1 / c1
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            };
            if node.abs() > *largest.borrow() {
                *largest.borrow_mut() = node.abs();
            }
            node
        },
        Mode::EndpointSingular,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let value = outer?;
    let miss = worst_miss.into_inner();
    if miss > cfg.abs_tol.max(cfg.rel_tol * largest.into_inner()) {
        return Err(Error::Quadrature { value, error: miss });
    }
    Ok(value)
}

/// Log of `∫∫_(0,∞)² exp(g(u, v)) du dv` for a log-integrand `g`.
///
/// Uses `u = s t`, `v = s (1-t)` so that a singularity at the origin becomes
/// a one-dimensional power in `s`; `s = x/(1-x)` maps the radius to (0,1).
pub fn integrate_positive_quadrant_log<G>(g: G, cfg: &QuadConfig) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let inner_cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 0.1 * cfg.rel_tol,
        max_level: TABLE_LEVELS.min(cfg.max_level + 1),
    };
    // inner failures only matter if the node is not negligible in the total
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let worst_unconverged = RefCell::new((f64::NEG_INFINITY, 0.0));
    let outer = integrate_unit_interval_log(
        |x, xc| {
            if failure.borrow().is_some() {
                return f64::NEG_INFINITY;
            }
            let s = x / xc;
            if !(s > 0.0 && s.is_finite()) {
                return f64::NEG_INFINITY;
            }
            match log_quadrature(|t, tc| g(s * t, s * tc), Mode::EndpointSingular, &inner_cfg) {
                Ok((v, err)) => {
                    let node = v + s.ln() - 2.0 * xc.ln();
                    if err > inner_cfg.rel_tol && node > worst_unconverged.borrow().0 {
                        *worst_unconverged.borrow_mut() = (node, err);
                    }
                    node
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    f64::NEG_INFINITY
                }
            }
        },
        Mode::EndpointSingular,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let total = outer?;
    let (node, err) = worst_unconverged.into_inner();
    if node > total - 40.0 {
        return Err(Error::Quadrature {
            value: total.exp(),
            error: err * (node - total).exp(),
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::ln_gamma;

    fn beta(a: f64, b: f64) -> f64 {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }

    #[test]
    fn constant() {
        let v = integrate_unit_interval(|_| 1.0, Mode::Smooth).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn arcsine_density() {
        let v = integrate_unit_interval_with(
            |x, xc| x.powf(-0.5) * xc.powf(-0.5),
            Mode::EndpointSingular,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((v - PI).abs() < 1e-9);
    }

    #[test]
    fn polynomial_beta() {
        let v = integrate_unit_interval(|x| x * x * (1.0 - x).powi(3), Mode::Smooth).unwrap();
        assert!((v - 1.0 / 60.0).abs() < 1e-14);
    }

    #[test]
    fn beta_grid() {
        let vals = [0.3, 0.5, 1.0, 2.7, 5.0];
        for &a in &vals {
            for &b in &vals {
                let v = integrate_unit_interval_with(
                    |x, xc| x.powf(a - 1.0) * xc.powf(b - 1.0),
                    Mode::EndpointSingular,
                    &QuadConfig::default(),
                )
                .unwrap();
                let want = beta(a, b);
                assert!(
                    ((v - want) / want).abs() < 1e-9,
                    "B({a},{b}): {v} vs {want}"
                );
            }
        }
    }

    #[test]
    fn log_variant_matches() {
        let ln = integrate_unit_interval_log(
            |x, xc| 1.5 * x.ln() + 0.7 * xc.ln() + 300.0,
            Mode::EndpointSingular,
            &QuadConfig::default(),
        )
        .unwrap();
        let want = beta(2.5, 1.7).ln() + 300.0;
        assert!((ln - want).abs() < 1e-10);
    }

    #[test]
    fn beta_weighted_strong_singularity() {
        for &(a, b) in &[
            (0.005, 3.0),
            (0.02, 0.01),
            (1.0, 1.0),
            (40.0, 0.3),
            (150.0, 90.0),
        ] {
            let ln = integrate_beta_weighted_log(a, b, |_, _| 0.0, &QuadConfig::default()).unwrap();
            let want = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
            assert!((ln - want).abs() < 1e-9, "({a},{b}): {ln} vs {want}");
        }
        // ∫ w^(a-1)(1-w)^(b-1) w dw = B(a+1, b)
        let ln =
            integrate_beta_weighted_log(0.01, 0.5, |ln_w, _| ln_w, &QuadConfig::default()).unwrap();
        let want = ln_gamma(1.01) + ln_gamma(0.5) - ln_gamma(1.51);
        assert!((ln - want).abs() < 1e-9);
    }

    #[test]
    fn nonfinite_integrand_is_reported() {
        let r = integrate_unit_interval(
            |x| if x > 0.3 && x < 0.7 { f64::NAN } else { 1.0 },
            Mode::Smooth,
        );
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn quadrant_log_singular_origin() {
        // ∫∫ (u+v)^(-1.5) e^(-(u+v)) = Γ(0.5)
        let cfg = QuadConfig {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_level: 10,
        };
        let v = integrate_positive_quadrant_log(|u, v| -1.5 * (u + v).ln() - u - v, &cfg).unwrap();
        assert!((v.exp() - std::f64::consts::PI.sqrt()).abs() < 1e-9);
        let w = integrate_positive_quadrant_log(|u, v| u.ln() - u - 2.0 * v, &cfg).unwrap();
        assert!((w.exp() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn quadrant_exponential() {
        let v = integrate_positive_quadrant(|u, v| (-u - v).exp()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn quadrant_separable() {
        let v = integrate_positive_quadrant(|u, v| u * (-u - 2.0 * v).exp()).unwrap();
        assert!((v - 0.5).abs() < 1e-8);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = QuadConfig {
            max_level: 40,
            ..QuadConfig::default()
        };
        assert!(integrate_unit_interval_with(|_, _| 1.0, Mode::Smooth, &cfg).is_err());
    }
}
