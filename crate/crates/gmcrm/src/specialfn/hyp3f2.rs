//! Generalized hypergeometric ₃F₂ at unit argument.
//!
//! Direct summation runs on term ratios with a rescaled Kahan accumulator.
//! Slowly converging series (margin near zero) switch to Richardson
//! extrapolation on geometrically spaced partial sums, using the known
//! algebraic tail exponents `s, s+1, s+2, ...`.

use super::ln_gamma;
use crate::error::{Error, Result};

/// Parameters of `3F2(a1, a2, a3; b1, b2; 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp3F2Params {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Hyp3F2Params {
    pub fn new(a1: f64, a2: f64, a3: f64, b1: f64, b2: f64) -> Self {
        Self { a1, a2, a3, b1, b2 }
    }

    /// Convergence margin `b1 + b2 - a1 - a2 - a3`.
    pub fn margin(&self) -> f64 {
        self.b1 + self.b2 - self.a1 - self.a2 - self.a3
    }

    fn numerators(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    fn denominators(&self) -> [f64; 2] {
        [self.b1, self.b2]
    }
}

/// Stopping rule for the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_terms: 10_000_000,
        }
    }
}

fn is_nonpos_int(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn validate(p: &Hyp3F2Params, cfg: &SeriesConfig) -> Result<Option<usize>> {
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol <= 1e-6) {
        return Err(Error::Domain(format!(
            "rel_tol must lie in (0, 1e-6], got {}",
            cfg.rel_tol
        )));
    }
    let all = [p.a1, p.a2, p.a3, p.b1, p.b2];
    if all.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite 3F2 parameter in {p:?}")));
    }
    if p.denominators().iter().any(|&b| is_nonpos_int(b)) {
        return Err(Error::Domain(format!(
            "denominator parameter is a nonpositive integer in {p:?}"
        )));
    }
    let terminating = p
        .numerators()
        .iter()
        .filter(|&&a| is_nonpos_int(a))
        .map(|&a| (-a) as usize)
        .min();
    if terminating.is_none() && !(p.margin() > 0.0) {
        return Err(Error::Divergent(p.margin()));
    }
    Ok(terminating)
}

/// Sum of the series at x = 1.
pub fn hyp3f2_unit(p: Hyp3F2Params, rel_tol: f64) -> Result<f64> {
    hyp3f2_unit_with(
        p,
        &SeriesConfig {
            rel_tol,
            ..SeriesConfig::default()
        },
    )
}

/// [`hyp3f2_unit`] with an explicit iteration cap.
pub fn hyp3f2_unit_with(p: Hyp3F2Params, cfg: &SeriesConfig) -> Result<f64> {
    let terminating = validate(&p, cfg)?;
    let (ln_abs, sign) = sum_series(&p, cfg, terminating)?;
    Ok(sign * ln_abs.exp())
}

/// Same value as [`hyp3f2_unit`], after moving to the Thomae representative
/// with the largest convergence margin.
pub fn hyp3f2_accelerated(p: Hyp3F2Params, rel_tol: f64) -> Result<f64> {
    let (ln_abs, sign) = accelerated(
        &p,
        &SeriesConfig {
            rel_tol,
            ..SeriesConfig::default()
        },
    )?;
    Ok(sign * ln_abs.exp())
}

/// Log of [`hyp3f2_accelerated`]; errors when the value is not positive.
pub fn ln_hyp3f2_accelerated(p: Hyp3F2Params, rel_tol: f64) -> Result<f64> {
    let (ln_abs, sign) = accelerated(
        &p,
        &SeriesConfig {
            rel_tol,
            ..SeriesConfig::default()
        },
    )?;
    if sign > 0.0 {
        Ok(ln_abs)
    } else {
        Err(Error::Numeric(format!("3F2 value not positive for {p:?}")))
    }
}

fn accelerated(p: &Hyp3F2Params, cfg: &SeriesConfig) -> Result<(f64, f64)> {
    let terminating = validate(p, cfg)?;
    if terminating.is_some() {
        return sum_series(p, cfg, terminating);
    }
    let (q, ln_pref) = best_representative(p);
    if ln_pref == 0.0 && q == *p {
        return sum_series(p, cfg, None);
    }
    let terminating = validate(&q, cfg)?;
    let (ln_abs, sign) = sum_series(&q, cfg, terminating)?;
    Ok((ln_abs + ln_pref, sign))
}

/// One Thomae step with numerator `i` in the distinguished slot:
/// 3F2(a,b,c;d,e) = Γ(d)Γ(e)Γ(s)/(Γ(a)Γ(s+b)Γ(s+c)) · 3F2(d-a, e-a, s; s+b, s+c).
/// The new margin equals `a`. Returns `None` when a gamma argument is not positive.
fn thomae(p: &Hyp3F2Params, i: usize) -> Option<Hyp3F2Params> {
    let a = p.numerators();
    let [d, e] = p.denominators();
    let s = p.margin();
    let ai = a[i];
    let (b, c) = match i {
        0 => (a[1], a[2]),
        1 => (a[0], a[2]),
        _ => (a[0], a[1]),
    };
    if !(d > 0.0 && e > 0.0 && s > 0.0 && ai > 0.0 && s + b > 0.0 && s + c > 0.0) {
        return None;
    }
    Some(Hyp3F2Params::new(d - ai, e - ai, s, s + b, s + c))
}

fn thomae_ln_prefactor(p: &Hyp3F2Params, i: usize) -> f64 {
    let a = p.numerators();
    let [d, e] = p.denominators();
    let s = p.margin();
    let (b, c) = match i {
        0 => (a[1], a[2]),
        1 => (a[0], a[2]),
        _ => (a[0], a[1]),
    };
    ln_gamma(d) + ln_gamma(e) + ln_gamma(s) - ln_gamma(a[i]) - ln_gamma(s + b) - ln_gamma(s + c)
}

fn canonical_key(p: &Hyp3F2Params) -> [i64; 5] {
    let mut a = p.numerators();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut b = p.denominators();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let q = |x: f64| (x * 1e9).round() as i64;
    [q(a[0]), q(a[1]), q(a[2]), q(b[0]), q(b[1])]
}

fn score(p: &Hyp3F2Params) -> (bool, f64) {
    (p.numerators().iter().all(|&a| a >= 0.0), p.margin())
}

fn better(x: (bool, f64), y: (bool, f64)) -> bool {
    match (x.0, y.0) {
        (true, false) => true,
        (false, true) => false,
        _ => x.1 > y.1 * (1.0 + 1e-12) + 1e-12,
    }
}

/// Breadth-first walk of the two-term Thomae orbit to depth 3, returning the
/// representative with the best (nonnegative numerators, margin) score and the
/// log of the accumulated prefactor.
fn best_representative(p: &Hyp3F2Params) -> (Hyp3F2Params, f64) {
    struct Node {
        p: Hyp3F2Params,
        parent: usize,
        via: usize,
    }
    let mut nodes = vec![Node {
        p: *p,
        parent: usize::MAX,
        via: 0,
    }];
    let mut seen = vec![canonical_key(p)];
    let mut frontier = vec![0usize];
    for _ in 0..3 {
        let mut next = Vec::new();
        for &ix in &frontier {
            for i in 0..3 {
                if let Some(q) = thomae(&nodes[ix].p, i) {
                    let key = canonical_key(&q);
                    if !seen.contains(&key) {
                        seen.push(key);
                        nodes.push(Node {
                            p: q,
                            parent: ix,
                            via: i,
                        });
                        next.push(nodes.len() - 1);
                    }
                }
            }
        }
        frontier = next;
    }
    let mut best = 0usize;
    for (ix, n) in nodes.iter().enumerate().skip(1) {
        if better(score(&n.p), score(&nodes[best].p)) {
            best = ix;
        }
    }
    let mut ln_pref = 0.0;
    let mut ix = best;
    while ix != 0 {
        let n = &nodes[ix];
        ln_pref += thomae_ln_prefactor(&nodes[n.parent].p, n.via);
        ix = n.parent;
    }
    (nodes[best].p, ln_pref)
}

/// First index from which term ratios stay in (0, 1).
fn tail_start(a: [f64; 3], b: [f64; 2]) -> usize {
    let e1 = a[0] + a[1] + a[2];
    let e2 = a[0] * a[1] + a[0] * a[2] + a[1] * a[2];
    let e3 = a[0] * a[1] * a[2];
    let f1 = b[0] + b[1] + 1.0;
    let f2 = b[0] * b[1] + b[0] + b[1];
    let f3 = b[0] * b[1];
    let (qa, qb, qc) = (e1 - f1, e2 - f2, e3 - f3);
    let disc = qb * qb - 4.0 * qa * qc;
    let mut start = 1.0f64;
    if disc >= 0.0 && qa != 0.0 {
        let r1 = (-qb - disc.sqrt()) / (2.0 * qa);
        let r2 = (-qb + disc.sqrt()) / (2.0 * qa);
        start = start.max(r1.max(r2).ceil() + 1.0);
    }
    for &x in a.iter().chain(b.iter()) {
        start = start.max((-x).ceil() + 1.0);
    }
    start as usize
}

struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
    fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }
}

/// Richardson table for partial sums at N, 2N, 4N, ... with error exponents
/// `s, s+1, ...`. Returns the two most refined diagonal estimates.
fn richardson(records: &[f64], s: f64) -> (f64, f64) {
    let mut col: Vec<f64> = records.to_vec();
    let mut prev_best = col[col.len() - 1];
    let mut m = 0;
    while col.len() > 1 {
        let f = 2f64.powf(s + m as f64) - 1.0;
        let next: Vec<f64> = col.windows(2).map(|w| w[1] + (w[1] - w[0]) / f).collect();
        prev_best = col[col.len() - 1];
        col = next;
        m += 1;
    }
    (col[0], prev_best)
}

/// Returns `(ln|sum|, sign)`.
fn sum_series(
    p: &Hyp3F2Params,
    cfg: &SeriesConfig,
    terminating: Option<usize>,
) -> Result<(f64, f64)> {
    let a = p.numerators();
    let b = p.denominators();
    let ratio =
        |j: f64| (a[0] + j) * (a[1] + j) * (a[2] + j) / ((b[0] + j) * (b[1] + j) * (1.0 + j));
    let mut scale = 0.0f64;
    let mut t = 1.0f64;
    let mut acc = Accumulator {
        sum: 1.0,
        comp: 0.0,
    };
    let finish = |acc: &Accumulator, scale: f64| {
        let v = acc.sum;
        if v == 0.0 {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (scale + v.abs().ln(), v.signum())
        }
    };

    if let Some(m) = terminating {
        for j in 0..m {
            t *= ratio(j as f64);
            if t.abs() > 1e200 {
                let f = t.abs();
                t /= f;
                acc.scale(1.0 / f);
                scale += f.ln();
            }
            acc.add(t);
        }
        return Ok(finish(&acc, scale));
    }

    let s = p.margin();
    let start = tail_start(a, b);
    let big = a.iter().chain(b.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let first_record = (4096.0f64).max(32.0 * big).max(2.0 * start as f64) as usize;
    let mut next_record = first_record;
    let mut records: Vec<f64> = Vec::new();
    let mut last_est: Option<f64> = None;

    let mut j = 0usize;
    loop {
        if j >= cfg.max_terms {
            return Err(Error::NonConvergence {
                terms: cfg.max_terms,
            });
        }
        // acc holds terms 0..=j, t is term j.
        if j + 1 == next_record {
            records.push(acc.sum);
            next_record *= 2;
            if records.len() >= 3 {
                let (est, prev) = richardson(&records, s);
                if (est - prev).abs() <= cfg.rel_tol * est.abs() {
                    if let Some(le) = last_est {
                        if (est - le).abs() <= cfg.rel_tol * est.abs() {
                            acc = Accumulator {
                                sum: est,
                                comp: 0.0,
                            };
                            return Ok(finish(&acc, scale));
                        }
                    }
                }
                last_est = Some(est);
            }
        }
        let r = ratio(j as f64);
        t *= r;
        j += 1;
        if t.abs() > 1e200 {
            let f = t.abs();
            t /= f;
            acc.scale(1.0 / f);
            for x in records.iter_mut() {
                *x /= f;
            }
            scale += f.ln();
        }
        acc.add(t);
        if t == 0.0 {
            return Ok(finish(&acc, scale));
        }
        if j >= start && r > 0.0 && r < 1.0 {
            let tail = 2.0 * t.abs() * f64::max(r / (1.0 - r), j as f64 / s);
            if tail <= cfg.rel_tol * acc.sum.abs() {
                return Ok(finish(&acc, scale));
            }
        }
    }
}
