//! Gaussian kernel with a normal/inverse-gamma base measure.
//!
//! Under `P0`, `V ~ IG(s, S)` (shape, rate) and `M | V ~ N(m, τV)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::distribution::{Continuous, StudentsT};

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Component mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParam {
    pub mean: f64,
    pub var: f64,
}

impl ClusterParam {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite() && mean.is_finite()) {
            return domain(format!("invalid cluster parameter ({mean}, {var})"));
        }
        Ok(Self { mean, var })
    }
}

#[inline]
pub fn ln_kernel_density(x: f64, theta: &ClusterParam) -> f64 {
    let d = x - theta.mean;
    -LN_SQRT_2PI - 0.5 * theta.var.ln() - 0.5 * d * d / theta.var
}

pub fn kernel_density(x: f64, theta: &ClusterParam) -> f64 {
    ln_kernel_density(x, theta).exp()
}

/// Normal/inverse-gamma base measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigBase {
    pub m: f64,
    pub tau: f64,
    pub s: f64,
    pub big_s: f64,
}

/// Count, sum and sum of squares of a set of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuffStats {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl SuffStats {
    pub fn of(xs: &[f64]) -> Self {
        xs.iter().fold(Self::default(), |mut acc, &x| {
            acc.push(x);
            acc
        })
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }
}

impl NigBase {
    pub fn new(m: f64, tau: f64, s: f64, big_s: f64) -> Result<Self> {
        if !m.is_finite() || !(tau > 0.0 && s > 0.0 && big_s > 0.0) {
            return domain(format!(
                "invalid NIG parameters m={m} tau={tau} s={s} S={big_s}"
            ));
        }
        Ok(Self { m, tau, s, big_s })
    }

    /// Conjugate update; the posterior stays in the family.
    pub fn posterior(&self, st: &SuffStats) -> NigBase {
        let n = st.n as f64;
        let d = 1.0 + self.tau * n;
        let m = self.m;
        NigBase {
            m: (m + self.tau * st.sum) / d,
            tau: self.tau / d,
            s: self.s + 0.5 * n,
            big_s: self.big_s
                + 0.5 * st.sum_sq
                + (m * m * n - st.sum * (2.0 * m + self.tau * st.sum)) / (2.0 * d),
        }
    }

    /// Prior predictive of one observation: Student-t with `2s` degrees of
    /// freedom, location `m`, scale `sqrt(S(1+τ)/s)`.
    pub fn ln_marginal_density(&self, x: f64) -> f64 {
        let scale = (self.big_s * (1.0 + self.tau) / self.s).sqrt();
        StudentsT::new(self.m, scale, 2.0 * self.s)
            .expect("validated NIG parameters")
            .ln_pdf(x)
    }

    pub fn marginal_density(&self, x: f64) -> f64 {
        self.ln_marginal_density(x).exp()
    }

    /// One draw of `(M, V)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ClusterParam {
        let precision = Gamma::new(self.s, 1.0 / self.big_s)
            .expect("validated NIG parameters")
            .sample(rng);
        let var = 1.0 / precision;
        let z: f64 = StandardNormal.sample(rng);
        ClusterParam {
            mean: self.m + (self.tau * var).sqrt() * z,
            var,
        }
    }
}

/// Prior predictive density `∫ h(x; θ) P0(dθ)`.
pub fn marginal_density(x: f64, base: &NigBase) -> f64 {
    base.marginal_density(x)
}

/// Draw from the conjugate posterior given the cluster's members; no
/// members gives a prior draw.
pub fn posterior_cluster_draw<R: Rng + ?Sized>(
    members: &[f64],
    base: &NigBase,
    rng: &mut R,
) -> ClusterParam {
    base.posterior(&SuffStats::of(members)).draw(rng)
}

/// Hyperpriors: `1/τ ~ Ga(w/2, W/2)`, `m ~ N(a, A)`, `c ~ Ga(a0, b0)`;
/// `z` and `σ` are uniform on (0,1). `s`, `S` are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperpriors {
    pub w: f64,
    pub big_w: f64,
    pub s: f64,
    pub big_s: f64,
    pub a: f64,
    pub big_a: f64,
    pub a0: f64,
    pub b0: f64,
}

impl Hyperpriors {
    /// Defaults used for the Iris analysis, with `a` set to the pooled mean.
    pub fn with_pooled_mean(data: &[f64]) -> Self {
        let a = if data.is_empty() {
            0.0
        } else {
            data.iter().sum::<f64>() / data.len() as f64
        };
        Self {
            w: 1.0,
            big_w: 100.0,
            s: 1.0,
            big_s: 1.0,
            a,
            big_a: 2.0,
            a0: 2.0,
            b0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.w, self.big_w, self.s, self.big_s, self.big_a, self.a0, self.b0,
        ];
        if pos.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !self.a.is_finite() {
            return domain(format!("invalid hyperpriors {self:?}"));
        }
        Ok(())
    }
}
