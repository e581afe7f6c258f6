//! Forward simulation and closed-form references for checking the exact
//! kernels. Nothing here is used by the sampler.
//!
//! Under GM-dependence with gamma CRMs, `p̃_i = w_i p_i + (1 - w_i) p_0`
//! where `p_0, p_1, p_2` are independent Dirichlet processes with masses
//! `c(1-z), cz, cz` and `w_i = μ_i / (μ_i + μ_0)` for independent gamma
//! totals, independent of the components.

use std::cell::Cell;
use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardUniform};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

use crate::crm::GmDependenceParams;
use crate::error::{domain, Error, Result};
use crate::specialfn::{integrate_beta_weighted_log, ln_add_exp, ln_gamma, ln_poch, QuadConfig};

/// Number of atoms kept per stick-breaking component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StickBreakingTruncation {
    pub level: usize,
}

impl Default for StickBreakingTruncation {
    fn default() -> Self {
        Self { level: 1000 }
    }
}

impl StickBreakingTruncation {
    pub const MIN_LEVEL: usize = 50;

    pub fn new(level: usize) -> Result<Self> {
        if level < Self::MIN_LEVEL {
            return domain(format!(
                "truncation must be at least {}, got {level}",
                Self::MIN_LEVEL
            ));
        }
        Ok(Self { level })
    }

    /// Expected stick mass beyond the truncation for a process of the given
    /// total mass.
    pub fn tail_bound(&self, mass: f64) -> f64 {
        (mass / (1.0 + mass)).powi(self.level as i32)
    }
}

/// Atoms and weights of a discrete probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub locations: Vec<f64>,
    pub weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteMeasure {
    fn new(locations: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            locations,
            weights,
            cumulative,
        }
    }

    /// Mass of the atoms whose location satisfies `pred`.
    pub fn mass(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.locations
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| pred(**x))
            .map(|(_, w)| w)
            .sum()
    }

    /// Index of an atom drawn from the measure.
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(0.0);
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.weights.len() - 1)
    }
}

/// Stick-breaking draw of a Dirichlet process with the given mass. The last
/// stick takes whatever remains, so the weights sum to one.
pub fn stick_breaking<R, B>(
    mass: f64,
    trunc: StickBreakingTruncation,
    base: &mut B,
    rng: &mut R,
) -> DiscreteMeasure
where
    R: Rng + ?Sized,
    B: FnMut(&mut R) -> f64,
{
    let n = trunc.level;
    let mut weights = Vec::with_capacity(n);
    let mut rest = 1.0;
    for j in 0..n {
        let w = if j + 1 == n || mass == 0.0 {
            rest
        } else {
            // Beta(1, mass) by inversion
            let u: f64 = rng.sample(StandardUniform);
            let v = -(u.ln() / mass).exp_m1();
            v * rest
        };
        weights.push(w);
        rest -= w;
        if rest <= 0.0 {
            rest = 0.0;
        }
    }
    let locations = (0..n).map(|_| base(rng)).collect();
    DiscreteMeasure::new(locations, weights)
}

/// One draw of the pair `(p̃_1, p̃_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmDirichletPair {
    /// `w_1, w_2`.
    pub weights: [f64; 2],
    /// `p_0` (common), `p_1`, `p_2`.
    pub components: [DiscreteMeasure; 3],
    /// Largest expected truncated tail mass among the components.
    pub tail_bound: f64,
}

/// Atom identity: component index and position within it.
pub type AtomId = (usize, usize);

impl GmDirichletPair {
    /// `p̃_i(A)` for `i ∈ {0, 1}` (sample index).
    pub fn mass(&self, sample: usize, pred: impl Fn(f64) -> bool + Copy) -> f64 {
        let w = self.weights[sample];
        w * self.components[sample + 1].mass(pred) + (1.0 - w) * self.components[0].mass(pred)
    }

    /// Atom drawn from `p̃_i`.
    pub fn draw_atom<R: Rng + ?Sized>(&self, sample: usize, rng: &mut R) -> AtomId {
        let comp = if rng.random::<f64>() < self.weights[sample] {
            sample + 1
        } else {
            0
        };
        (comp, self.components[comp].draw_index(rng))
    }

    /// `p̃_1` and `p̃_2` as explicit atomic measures; common atoms come first.
    pub fn measures(&self) -> [DiscreteMeasure; 2] {
        std::array::from_fn(|i| {
            let w = self.weights[i];
            let p0 = &self.components[0];
            let pi = &self.components[i + 1];
            let locations = p0.locations.iter().chain(&pi.locations).copied().collect();
            let weights = p0
                .weights
                .iter()
                .map(|x| (1.0 - w) * x)
                .chain(pi.weights.iter().map(|x| w * x))
                .collect();
            DiscreteMeasure::new(locations, weights)
        })
    }
}

/// Forward simulation of a GM-dependent Dirichlet pair.
pub fn simulate_gm_dirichlet<R, B>(
    params: GmDependenceParams,
    mut base: B,
    trunc: StickBreakingTruncation,
    rng: &mut R,
) -> Result<GmDirichletPair>
where
    R: Rng + ?Sized,
    B: FnMut(&mut R) -> f64,
{
    let p = GmDependenceParams::new(params.c, params.z)?;
    let trunc = StickBreakingTruncation::new(trunc.level)?;
    let common = p.c * (1.0 - p.z);
    let own = p.c * p.z;
    let gamma = |shape: f64, rng: &mut R| -> f64 {
        if shape == 0.0 {
            0.0
        } else {
            Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
        }
    };
    let mu0 = gamma(common, rng);
    let mu1 = gamma(own, rng);
    let mu2 = gamma(own, rng);
    let weights = [mu1, mu2].map(|m| if m + mu0 > 0.0 { m / (m + mu0) } else { 0.5 });
    let components = [
        stick_breaking(common, trunc, &mut base, rng),
        stick_breaking(own, trunc, &mut base, rng),
        stick_breaking(own, trunc, &mut base, rng),
    ];
    Ok(GmDirichletPair {
        weights,
        components,
        tail_bound: trunc.tail_bound(common).max(trunc.tail_bound(own)),
    })
}

fn gm_interior(c: f64, z: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite() && z > 0.0 && z < 1.0) {
        return domain(format!(
            "bivariate beta needs c > 0 and 0 < z < 1, got c={c}, z={z}"
        ));
    }
    Ok(())
}

/// Log density of the Olkin–Liu bivariate beta law of `(w_1, w_2)`.
pub fn ln_olkin_liu_density(c: f64, z: f64, w1: f64, w2: f64) -> Result<f64> {
    gm_interior(c, z)?;
    if !(w1 > 0.0 && w1 < 1.0 && w2 > 0.0 && w2 < 1.0) {
        return domain(format!("weights must lie in (0,1), got ({w1}, {w2})"));
    }
    Ok(ln_olkin_liu_unchecked(
        c,
        z,
        w1.ln(),
        w2.ln(),
        (-w1).ln_1p(),
        (-w2).ln_1p(),
    ))
}

fn ln_olkin_liu_unchecked(c: f64, z: f64, l1: f64, l2: f64, lc1: f64, lc2: f64) -> f64 {
    let cz = c * z;
    let norm = ln_gamma(c + cz) - 2.0 * ln_gamma(cz) - ln_gamma(c - cz);
    // 1 - w1 w2 = (1-w1) + w1 (1-w2)
    let ln_d = ln_add_exp(lc1, l1 + lc2);
    norm + (cz - 1.0) * (l1 + l2) + (c - 1.0) * (lc1 + lc2) - (c + cz) * ln_d
}

pub fn olkin_liu_density(c: f64, z: f64, w1: f64, w2: f64) -> Result<f64> {
    ln_olkin_liu_density(c, z, w1, w2).map(f64::exp)
}

/// Runs `f` with a slot for the first error raised inside a quadrature
/// callback, which can only return a value.
fn nested<T>(f: impl FnOnce(&dyn Fn(Result<f64>) -> f64) -> Result<T>) -> Result<T> {
    let slot: Cell<Option<Error>> = Cell::new(None);
    let out = f(&|r| match r {
        Ok(v) => v,
        Err(e) => {
            slot.set(Some(e));
            f64::NEG_INFINITY
        }
    })?;
    match slot.take() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Total Olkin–Liu mass of the unit square by nested quadrature. Near
/// `w_1 = 1` the inner integral grows like `(1 - w_1)^(-cz)`; that factor is
/// moved into the outer weight so both integrands stay bounded.
pub fn olkin_liu_mass(c: f64, z: f64, cfg: &QuadConfig) -> Result<f64> {
    gm_interior(c, z)?;
    let cz = c * z;
    let norm = ln_gamma(c + cz) - 2.0 * ln_gamma(cz) - ln_gamma(c - cz);
    let ln_total = nested(|catch| {
        integrate_beta_weighted_log(
            cz,
            c - cz,
            |l1, lc1| {
                let inner = integrate_beta_weighted_log(
                    cz,
                    c,
                    |_, lc2| -(c + cz) * ln_add_exp(lc1, l1 + lc2),
                    cfg,
                );
                match inner {
                    // mass within ε of w_1 = 1 is of order ε^(c - cz); below
                    // e^-60 of it the inner kernel has a feature too narrow
                    // for any fixed grid and the node is dropped
                    Err(Error::Quadrature { .. }) if (c - cz) * lc1 < -60.0 => f64::NEG_INFINITY,
                    r => catch(r) + cz * lc1,
                }
            },
            cfg,
        )
    })?;
    Ok((norm + ln_total).exp())
}

/// Joint distribution function `P[w_1 ≤ x, w_2 ≤ y]` of the Olkin–Liu law.
pub fn olkin_liu_cdf(c: f64, z: f64, x: f64, y: f64, cfg: &QuadConfig) -> Result<f64> {
    gm_interior(c, z)?;
    if x.is_nan() || y.is_nan() {
        return domain("distribution function at NaN");
    }
    let cz = c * z;
    if x <= 0.0 || y <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 || y >= 1.0 {
        // each weight is Beta(cz, c(1-z)) on its own
        let marginal = Beta::new(cz, c - cz).map_err(|e| Error::Numeric(e.to_string()))?;
        return Ok(marginal.cdf(x.min(y).min(1.0)));
    }
    // w_1 = x u_1, w_2 = y u_2; the remaining factors are smooth on [0,1]²
    let norm = ln_gamma(c + cz) - 2.0 * ln_gamma(cz) - ln_gamma(c - cz) + cz * (x.ln() + y.ln());
    let ln_total = nested(|catch| {
        integrate_beta_weighted_log(
            cz,
            1.0,
            |l1, _| {
                let u1 = l1.exp();
                let inner = integrate_beta_weighted_log(
                    cz,
                    1.0,
                    |l2, _| {
                        let u2 = l2.exp();
                        (c - 1.0) * (-y * u2).ln_1p() - (c + cz) * (-x * y * u1 * u2).ln_1p()
                    },
                    cfg,
                );
                catch(inner) + (c - 1.0) * (-x * u1).ln_1p()
            },
            cfg,
        )
    })?;
    Ok((norm + ln_total).exp())
}

/// Olkin–Liu probabilities of the cells of a regular `m × m` grid on the
/// unit square, row-major in `w_1`.
pub fn olkin_liu_cell_probabilities(
    c: f64,
    z: f64,
    m: usize,
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    if m == 0 {
        return domain("grid needs at least one cell");
    }
    let edge = |i: usize| i as f64 / m as f64;
    let mut cdf = vec![vec![0.0; m + 1]; m + 1];
    for i in 1..=m {
        for j in 1..=m {
            cdf[i][j] = olkin_liu_cdf(c, z, edge(i), edge(j), cfg)?;
        }
    }
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(cdf[i + 1][j + 1] - cdf[i][j + 1] - cdf[i + 1][j] + cdf[i][j]);
        }
    }
    Ok(out)
}

/// Draw of `(w_1, w_2)` through independent gamma totals.
pub fn draw_gm_weights<R: Rng + ?Sized>(c: f64, z: f64, rng: &mut R) -> Result<(f64, f64)> {
    gm_interior(c, z)?;
    let own = Gamma::new(c * z, 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    let common = Gamma::new(c * (1.0 - z), 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    let m0 = common.sample(rng);
    let m1 = own.sample(rng);
    let m2 = own.sample(rng);
    Ok((m1 / (m1 + m0), m2 / (m2 + m0)))
}

/// Ewens partition probability of block sizes `freq` for total mass `c`.
pub fn ln_ewens_eppf(c: f64, freq: &[u64]) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("Ewens mass must be positive, got {c}"));
    }
    let (n, k) = sizes(freq)?;
    Ok(k as f64 * c.ln() - ln_poch(c, n) + freq.iter().map(|&m| ln_gamma(m as f64)).sum::<f64>())
}

pub fn ewens_eppf(c: f64, freq: &[u64]) -> Result<f64> {
    ln_ewens_eppf(c, freq).map(f64::exp)
}

/// Partition probability of the normalized σ-stable process.
pub fn ln_stable_eppf(sigma: f64, freq: &[u64]) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return domain(format!("stable index must lie in (0,1), got {sigma}"));
    }
    let (n, k) = sizes(freq)?;
    let k = k as f64;
    Ok((k - 1.0) * sigma.ln() + ln_gamma(k) - ln_gamma(n as f64)
        + freq
            .iter()
            .map(|&m| ln_poch(1.0 - sigma, m - 1))
            .sum::<f64>())
}

pub fn stable_eppf(sigma: f64, freq: &[u64]) -> Result<f64> {
    ln_stable_eppf(sigma, freq).map(f64::exp)
}

fn sizes(freq: &[u64]) -> Result<(u64, usize)> {
    if freq.is_empty() || freq.contains(&0) {
        return domain(format!(
            "block sizes must be positive and nonempty, got {freq:?}"
        ));
    }
    Ok((freq.iter().sum(), freq.len()))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_err: (var / n).sqrt(),
            reps: values.len(),
        }
    }

    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_err
    }
}

/// Monte Carlo estimate of `E[p̃_1(A) p̃_2(B)]` with a uniform base on
/// (0,1), `A = [0, P0(A))` and `B` placed to overlap `A` by `P0(A∩B)`.
pub fn mixed_moment_mc<R: Rng + ?Sized>(
    params: GmDependenceParams,
    p0: (f64, f64, f64),
    reps: usize,
    trunc: StickBreakingTruncation,
    rng: &mut R,
) -> Result<McEstimate> {
    let (pa, pb, pab) = p0;
    if !(0.0..=1.0).contains(&pa)
        || !(0.0..=1.0).contains(&pb)
        || pab > pa.min(pb)
        || pab < pa + pb - 1.0
        || pab < 0.0
    {
        return domain(format!("inconsistent probabilities {p0:?}"));
    }
    if reps < 2 {
        return domain("need at least two replicates");
    }
    let b0 = pa - pab;
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let pair = simulate_gm_dirichlet(params, |r: &mut R| r.random::<f64>(), trunc, rng)?;
        let a = pair.mass(0, |x| x < pa);
        let b = pair.mass(1, |x| x >= b0 && x < b0 + pb);
        values.push(a * b);
    }
    Ok(McEstimate::from_values(&values))
}

/// Empirical law of the two-sample partition obtained by drawing `n1` and
/// `n2` observations from simulated pairs, keyed by canonical labels
/// (sample 1 first).
pub fn simulate_partition_frequencies<R: Rng + ?Sized>(
    params: GmDependenceParams,
    n1: usize,
    n2: usize,
    reps: usize,
    trunc: StickBreakingTruncation,
    rng: &mut R,
) -> Result<HashMap<Vec<usize>, u64>> {
    let mut table = HashMap::new();
    let mut atoms: Vec<AtomId> = Vec::with_capacity(n1 + n2);
    for _ in 0..reps {
        // locations are irrelevant for the partition
        let pair = simulate_gm_dirichlet(params, |_: &mut R| 0.0, trunc, rng)?;
        atoms.clear();
        atoms.extend((0..n1).map(|_| pair.draw_atom(0, rng)));
        atoms.extend((0..n2).map(|_| pair.draw_atom(1, rng)));
        let mut seen: Vec<AtomId> = Vec::new();
        let labels: Vec<usize> = atoms
            .iter()
            .map(|a| match seen.iter().position(|s| s == a) {
                Some(i) => i,
                None => {
                    seen.push(*a);
                    seen.len() - 1
                }
            })
            .collect();
        *table.entry(labels).or_insert(0) += 1;
    }
    Ok(table)
}

/// Pearson χ² goodness of fit: statistic, degrees of freedom and p-value.
/// `expected` holds probabilities and is scaled to the observed total.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<(f64, usize, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return domain("observed and expected must match in length (at least 2 cells)");
    }
    let total: u64 = observed.iter().sum();
    let psum: f64 = expected.iter().sum();
    let stat = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = total as f64 * p / psum;
            (o as f64 - e).powi(2) / e
        })
        .sum::<f64>();
    let df = observed.len() - 1;
    let p = 1.0
        - ChiSquared::new(df as f64)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .cdf(stat);
    Ok((stat, df, p))
}
