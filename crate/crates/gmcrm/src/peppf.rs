//! Partition probability functions and dependence functionals.
//!
//! All masses are computed in log space; the linear wrappers exponentiate.
//!
//! The label-conditional joint of partition and labels is
//!
//! ```text
//! Dirichlet: c^k z^(k̃1+k̃2) (1-z)^K0 ξ0 · 3F2(b, n1, n2; α+n1, β+n2; 1) / ((α)_n1 (β)_n2)
//! Stable:    Γ(k) σ^(k-1) ξσ z^(k̃1+k̃2) (1-z)^K0 / (Γ(n1) Γ(n2))
//!              · ∫ w^(n1-n̄1+k̃1σ-1) (1-w)^(n2-n̄2+k̃2σ-1) D(w)^(-k) dw
//! ```
//!
//! with `α = c+n2-n̄2`, `β = c+n1-n̄1`, `b = c(1-z)+n1-n̄1+n2-n̄2`,
//! `D(w) = 1-z+z w^σ+z (1-w)^σ`, `n̄i` the number of sample-i observations in
//! idiosyncratic clusters, and `K0 = k - k̃1 - k̃2` the number of clusters in
//! the common urn (shared clusters included).

use std::collections::BTreeMap;

use crate::crm::{h_z_unchecked, log_tau_unchecked, psi_unchecked, CrmFamily, GmDependenceParams};
use crate::error::{domain, Error, Result};
use crate::partition::LabelAssignment;
use crate::specialfn::{
    integrate_beta_weighted_log, integrate_positive_quadrant_log, integrate_unit_interval_log,
    integrate_unit_interval_with, ln_add_exp, ln_gamma, ln_hyp3f2_accelerated, ln_poch, ln_sum_exp,
    xlny, Hyp3F2Params, Mode, QuadConfig,
};

/// Cluster frequencies of a two-sample partition. The pEPPF depends on shared
/// clusters only through `qstar`; the per-sample split is kept when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyData {
    pub n1: u64,
    pub n2: u64,
    pub freq1: Vec<u64>,
    pub freq2: Vec<u64>,
    pub qstar: Vec<u64>,
    pub split: Option<(Vec<u64>, Vec<u64>)>,
}

impl FrequencyData {
    pub fn new(
        n1: u64,
        n2: u64,
        freq1: Vec<u64>,
        freq2: Vec<u64>,
        qstar: Vec<u64>,
    ) -> Result<Self> {
        let f = Self {
            n1,
            n2,
            freq1,
            freq2,
            qstar,
            split: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_split(freq1: Vec<u64>, freq2: Vec<u64>, q1: &[u64], q2: &[u64]) -> Result<Self> {
        if q1.len() != q2.len() || q1.iter().chain(q2).any(|&q| q == 0) {
            return domain("shared clusters need at least one member from each sample");
        }
        let n1 = freq1.iter().sum::<u64>() + q1.iter().sum::<u64>();
        let n2 = freq2.iter().sum::<u64>() + q2.iter().sum::<u64>();
        let qstar = q1.iter().zip(q2).map(|(a, b)| a + b).collect();
        let f = Self {
            n1,
            n2,
            freq1,
            freq2,
            qstar,
            split: Some((q1.to_vec(), q2.to_vec())),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.freq1.iter().chain(&self.freq2).any(|&n| n == 0) {
            return domain("cluster frequencies must be positive");
        }
        if self.qstar.iter().any(|&q| q < 2) {
            return domain("shared cluster sizes must be at least 2");
        }
        let u1: u64 = self.freq1.iter().sum();
        let u2: u64 = self.freq2.iter().sum();
        if u1 > self.n1 || u2 > self.n2 {
            return domain("unshared frequencies exceed the sample size");
        }
        let (s1, s2) = (self.n1 - u1, self.n2 - u2);
        let k0 = self.qstar.len() as u64;
        if s1 + s2 != self.qstar.iter().sum::<u64>() || s1 < k0 || s2 < k0 {
            return domain("shared frequencies are inconsistent with the sample sizes");
        }
        Ok(())
    }

    pub fn k1(&self) -> usize {
        self.freq1.len()
    }
    pub fn k2(&self) -> usize {
        self.freq2.len()
    }
    pub fn k0(&self) -> usize {
        self.qstar.len()
    }
    pub fn k(&self) -> usize {
        self.k1() + self.k2() + self.k0()
    }
}

/// Partition law of a GM-dependent pair: the Dirichlet case carries `c`; the
/// σ-stable case does not depend on `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionModel {
    Dirichlet { c: f64, z: f64 },
    Stable { sigma: f64, z: f64 },
}

impl PartitionModel {
    pub fn new(family: CrmFamily, params: GmDependenceParams) -> Result<Self> {
        family.validate()?;
        GmDependenceParams::new(params.c, params.z)?;
        Ok(match family {
            CrmFamily::Gamma => PartitionModel::Dirichlet {
                c: params.c,
                z: params.z,
            },
            CrmFamily::Stable(sigma) => PartitionModel::Stable { sigma, z: params.z },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let (family, c, z) = match *self {
            PartitionModel::Dirichlet { c, z } => (CrmFamily::Gamma, c, z),
            PartitionModel::Stable { sigma, z } => (CrmFamily::Stable(sigma), 1.0, z),
        };
        PartitionModel::new(family, GmDependenceParams { c, z }).map(|_| ())
    }

    pub fn z(&self) -> f64 {
        match *self {
            PartitionModel::Dirichlet { z, .. } | PartitionModel::Stable { z, .. } => z,
        }
    }

    /// σ for the stable case, 0 for the Dirichlet case (Pochhammer base of ξ).
    pub fn sigma_or_zero(&self) -> f64 {
        match *self {
            PartitionModel::Dirichlet { .. } => 0.0,
            PartitionModel::Stable { sigma, .. } => sigma,
        }
    }
}

/// Numeric accuracy targets for series and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    pub series_rel_tol: f64,
    pub quad: QuadConfig,
}

impl Precision {
    pub fn high() -> Self {
        Self {
            series_rel_tol: 1e-13,
            quad: QuadConfig {
                abs_tol: 0.0,
                rel_tol: 1e-12,
                max_level: 12,
            },
        }
    }

    pub fn sampler() -> Self {
        Self {
            series_rel_tol: 1e-8,
            quad: QuadConfig {
                abs_tol: 0.0,
                rel_tol: 1e-8,
                max_level: 12,
            },
        }
    }
}

/// Counts entering the label-conditional joint, apart from `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelStats {
    pub n1: u64,
    pub n2: u64,
    /// Sample-1 observations in idiosyncratic clusters.
    pub nbar1: u64,
    pub nbar2: u64,
    /// Total number of clusters.
    pub k: u64,
    /// Idiosyncratic cluster counts.
    pub kt1: u64,
    pub kt2: u64,
}

impl LabelStats {
    /// Clusters in the common urn, shared ones included.
    pub fn k_common(&self) -> u64 {
        self.k - self.kt1 - self.kt2
    }

    pub fn from_labels(f: &FrequencyData, labels: &LabelAssignment) -> Result<Self> {
        if labels.zeta1.len() != f.k1() || labels.zeta2.len() != f.k2() {
            return domain("label vector lengths do not match the unshared clusters");
        }
        let pick = |freq: &[u64], zeta: &[bool]| -> (u64, u64) {
            freq.iter()
                .zip(zeta)
                .filter(|(_, &b)| b)
                .fold((0, 0), |(s, c), (n, _)| (s + n, c + 1))
        };
        let (nbar1, kt1) = pick(&f.freq1, &labels.zeta1);
        let (nbar2, kt2) = pick(&f.freq2, &labels.zeta2);
        Ok(Self {
            n1: f.n1,
            n2: f.n2,
            nbar1,
            nbar2,
            k: f.k() as u64,
            kt1,
            kt2,
        })
    }
}

/// `Σ ln (1-σ)_(n-1)` over all clusters; `σ = 0` gives `Σ ln (n-1)!`.
pub fn ln_xi(sigma: f64, f: &FrequencyData) -> f64 {
    f.freq1
        .iter()
        .chain(&f.freq2)
        .chain(&f.qstar)
        .map(|&n| ln_poch(1.0 - sigma, n - 1))
        .sum()
}

/// Log of the label-conditional joint without the `ξ` factor.
pub fn ln_label_core(model: &PartitionModel, st: &LabelStats, prec: &Precision) -> Result<f64> {
    let z = model.z();
    let kt = (st.kt1 + st.kt2) as f64;
    let k0 = st.k_common() as f64;
    let zpart = xlny(kt, z) + xlny(k0, 1.0 - z);
    if zpart == f64::NEG_INFINITY {
        return Ok(zpart);
    }
    if st.n1 + st.n2 == 0 {
        return Ok(0.0);
    }
    match *model {
        PartitionModel::Dirichlet { c, z } => {
            let (n1, n2) = (st.n1 as f64, st.n2 as f64);
            let alpha = c + n2 - st.nbar2 as f64;
            let beta = c + n1 - st.nbar1 as f64;
            let b = c * (1.0 - z) + (n1 - st.nbar1 as f64) + (n2 - st.nbar2 as f64);
            let p = Hyp3F2Params::new(b, n1, n2, alpha + n1, beta + n2);
            let ln_f = ln_hyp3f2_accelerated(p, prec.series_rel_tol)?;
            Ok(st.k as f64 * c.ln() + zpart + ln_f - ln_poch(alpha, st.n1) - ln_poch(beta, st.n2))
        }
        PartitionModel::Stable { sigma, z } => {
            let k = st.k as f64;
            let head = ln_gamma(k) + (k - 1.0) * sigma.ln() + zpart;
            if st.n1 == 0 || st.n2 == 0 {
                return Ok(head - ln_gamma((st.n1 + st.n2) as f64));
            }
            let ln_int = ln_stable_integral(st, sigma, z, &prec.quad)?;
            Ok(head - ln_gamma(st.n1 as f64) - ln_gamma(st.n2 as f64) + ln_int)
        }
    }
}

/// `ln ∫_0^1 w^(A-1) (1-w)^(B-1) D(w)^(-k) dw` for two nonempty samples.
pub fn ln_stable_integral(st: &LabelStats, sigma: f64, z: f64, quad: &QuadConfig) -> Result<f64> {
    let a = (st.n1 - st.nbar1) as f64 + st.kt1 as f64 * sigma;
    let b = (st.n2 - st.nbar2) as f64 + st.kt2 as f64 * sigma;
    let k = st.k as f64;
    integrate_beta_weighted_log(
        a,
        b,
        |ln_w, ln_wc| -k * (z * ((sigma * ln_w).exp() + (sigma * ln_wc).exp() - 1.0)).ln_1p(),
        quad,
    )
}

/// Log of the joint mass of a partition and its labels.
pub fn ln_label_conditional_density(
    model: &PartitionModel,
    f: &FrequencyData,
    labels: &LabelAssignment,
    prec: &Precision,
) -> Result<f64> {
    model.validate()?;
    let st = LabelStats::from_labels(f, labels)?;
    Ok(ln_label_core(model, &st, prec)? + ln_xi(model.sigma_or_zero(), f))
}

/// Joint mass `g(n^(1), n^(2), q^(1), q^(2), ζ*)`.
pub fn label_conditional_density(
    family: CrmFamily,
    params: GmDependenceParams,
    f: &FrequencyData,
    labels: &LabelAssignment,
) -> Result<f64> {
    let model = PartitionModel::new(family, params)?;
    ln_label_conditional_density(&model, f, labels, &Precision::high()).map(f64::exp)
}

/// Distinct `(sum of frequencies, count)` over subsets of clusters, with the
/// number of subsets producing each.
fn subset_profiles(freq: &[u64]) -> Vec<(u64, u64, f64)> {
    let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    map.insert((0, 0), 1.0);
    for &n in freq {
        let mut next = map.clone();
        for (&(s, c), &m) in &map {
            *next.entry((s + n, c + 1)).or_insert(0.0) += m;
        }
        map = next;
    }
    map.into_iter().map(|((s, c), m)| (s, c, m)).collect()
}

/// Log pEPPF as the exact sum of the label-conditional joint over all labels.
pub fn ln_peppf(model: &PartitionModel, f: &FrequencyData, prec: &Precision) -> Result<f64> {
    model.validate()?;
    f.validate()?;
    let p1 = subset_profiles(&f.freq1);
    let p2 = subset_profiles(&f.freq2);
    let mut terms = Vec::with_capacity(p1.len() * p2.len());
    for &(nbar1, kt1, m1) in &p1 {
        for &(nbar2, kt2, m2) in &p2 {
            let st = LabelStats {
                n1: f.n1,
                n2: f.n2,
                nbar1,
                nbar2,
                k: f.k() as u64,
                kt1,
                kt2,
            };
            let v = ln_label_core(model, &st, prec)?;
            if v > f64::NEG_INFINITY {
                terms.push(v + m1.ln() + m2.ln());
            }
        }
    }
    Ok(ln_sum_exp(&terms) + ln_xi(model.sigma_or_zero(), f))
}

/// pEPPF of the GM-dependent Dirichlet process.
pub fn peppf_dirichlet(c: f64, z: f64, f: &FrequencyData) -> Result<f64> {
    let model = PartitionModel::new(CrmFamily::Gamma, GmDependenceParams::new(c, z)?)?;
    ln_peppf(&model, f, &Precision::high()).map(f64::exp)
}

/// pEPPF of the GM-dependent normalized σ-stable process.
pub fn peppf_stable(sigma: f64, z: f64, f: &FrequencyData) -> Result<f64> {
    let model = PartitionModel::new(CrmFamily::stable(sigma)?, GmDependenceParams::new(1.0, z)?)?;
    ln_peppf(&model, f, &Precision::high()).map(f64::exp)
}

/// Default bound on `n1 + n2` for [`peppf_general`].
pub const GENERAL_PEPPF_CAP: u64 = 12;

/// pEPPF from the general double-integral representation (oracle grade).
pub fn peppf_general(
    family: CrmFamily,
    params: GmDependenceParams,
    f: &FrequencyData,
) -> Result<f64> {
    peppf_general_with_cap(family, params, f, GENERAL_PEPPF_CAP)
}

/// [`peppf_general`] with an explicit size cap.
///
/// The sum over `i ∈ {0,1}^k1, l ∈ {0,1}^k2` is carried inside the integrand
/// through `Σ_i ∏_j = ∏_j (z τ(u) + (1-z) τ(u+v))`.
pub fn peppf_general_with_cap(
    family: CrmFamily,
    params: GmDependenceParams,
    f: &FrequencyData,
    cap: u64,
) -> Result<f64> {
    family.validate()?;
    let params = GmDependenceParams::new(params.c, params.z)?;
    f.validate()?;
    if f.n1 + f.n2 > cap {
        return Err(Error::Refused(format!(
            "n1 + n2 = {} exceeds the cap {cap}",
            f.n1 + f.n2
        )));
    }
    if f.n1 + f.n2 == 0 {
        return Ok(1.0);
    }
    let (c, z) = (params.c, params.z);
    let (lz, l1z) = (z.ln(), (1.0 - z).ln());
    let mix = |q: u64, x: f64, y: f64| {
        ln_add_exp(
            lz + log_tau_unchecked(family, q, x),
            l1z + log_tau_unchecked(family, q, y),
        )
    };
    let k = f.k() as f64;
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_level: 11,
    };
    if f.n2 == 0 || f.n1 == 0 {
        let (n, freq) = if f.n2 == 0 {
            (f.n1, &f.freq1)
        } else {
            (f.n2, &f.freq2)
        };
        let ln = integrate_unit_interval_log(
            |x, xc| {
                let u = x / xc;
                if !(u > 0.0 && u.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                let mut v =
                    (n as f64 - 1.0) * u.ln() - c * psi_unchecked(family, u) - 2.0 * xc.ln();
                for &m in freq.iter() {
                    v += log_tau_unchecked(family, m, u);
                }
                v
            },
            Mode::EndpointSingular,
            &cfg,
        )?;
        return Ok((k * c.ln() - ln_gamma(n as f64) + ln).exp());
    }
    let head =
        k * c.ln() - ln_gamma(f.n1 as f64) - ln_gamma(f.n2 as f64) + xlny(f.k0() as f64, 1.0 - z);
    if head == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let integrand = |u: f64, v: f64| {
        if !(u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let s = u + v;
        let mut val = (f.n1 as f64 - 1.0) * u.ln() + (f.n2 as f64 - 1.0) * v.ln()
            - c * h_z_unchecked(family, z, u, v);
        for &m in &f.freq1 {
            val += mix(m, u, s);
        }
        for &m in &f.freq2 {
            val += mix(m, v, s);
        }
        for &q in &f.qstar {
            val += log_tau_unchecked(family, q, s);
        }
        val
    };
    Ok((head + integrate_positive_quadrant_log(integrand, &cfg)?).exp())
}

/// `∫∫ exp(-c h_z(u,v)) τ_2(u+v) du dv`.
fn pair_integral(family: CrmFamily, params: GmDependenceParams) -> Result<f64> {
    let (c, z) = (params.c, params.z);
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_level: 11,
    };
    integrate_positive_quadrant_log(
        |u, v| {
            if u + v > 0.0 {
                -c * h_z_unchecked(family, z, u, v) + log_tau_unchecked(family, 2, u + v)
            } else {
                f64::NEG_INFINITY
            }
        },
        &cfg,
    )
    .map(f64::exp)
}

/// `E[p̃1(A) p̃2(B)]` from the baseline probabilities of `A`, `B` and `A∩B`.
pub fn mixed_moment(
    family: CrmFamily,
    params: GmDependenceParams,
    p0a: f64,
    p0b: f64,
    p0ab: f64,
) -> Result<f64> {
    check_probabilities(p0a, p0b, p0ab)?;
    family.validate()?;
    let params = GmDependenceParams::new(params.c, params.z)?;
    let base = p0a * p0b;
    let cov = p0ab - p0a * p0b;
    if params.z == 1.0 || cov == 0.0 {
        return Ok(base);
    }
    Ok(base + cov * params.c * (1.0 - params.z) * pair_integral(family, params)?)
}

fn check_probabilities(p0a: f64, p0b: f64, p0ab: f64) -> Result<()> {
    let unit = |p: f64| (0.0..=1.0).contains(&p);
    if !(unit(p0a) && unit(p0b) && unit(p0ab))
        || p0ab > p0a.min(p0b)
        || p0ab < p0a + p0b - 1.0 - 1e-15
    {
        return domain(format!(
            "inconsistent probabilities P0(A)={p0a}, P0(B)={p0b}, P0(A∩B)={p0ab}"
        ));
    }
    Ok(())
}

/// The dependence functional `I(c,z)`.
pub fn dependence_i(family: CrmFamily, params: GmDependenceParams) -> Result<f64> {
    family.validate()?;
    let GmDependenceParams { c, z } = GmDependenceParams::new(params.c, params.z)?;
    match family {
        CrmFamily::Gamma => {
            let p = Hyp3F2Params::new(c - c * z + 2.0, 1.0, 1.0, c + 2.0, c + 2.0);
            Ok(c / (c + 1.0) * ln_hyp3f2_accelerated(p, 1e-12)?.exp())
        }
        CrmFamily::Stable(s) => {
            let cfg = QuadConfig {
                abs_tol: 1e-13,
                rel_tol: 1e-12,
                max_level: 12,
            };
            let v = integrate_unit_interval_with(
                |w, wc| {
                    let lw = if w < 0.5 { w.ln() } else { (-wc).ln_1p() };
                    let w_pow = (lw / s).exp();
                    let one_minus = (-(lw / s).exp_m1()).powf(s);
                    w_pow / w / (1.0 + z * one_minus - z * wc)
                },
                Mode::EndpointSingular,
                &cfg,
            )?;
            Ok(v / s)
        }
    }
}

/// `I(c,z)` straight from its definition as a ratio of integrals.
pub fn dependence_i_by_quadrature(family: CrmFamily, params: GmDependenceParams) -> Result<f64> {
    family.validate()?;
    let params = GmDependenceParams::new(params.c, params.z)?;
    let c = params.c;
    let num = pair_integral(family, params)?;
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_level: 12,
    };
    let den = integrate_unit_interval_log(
        |x, xc| {
            let u = x / xc;
            u.ln() - c * psi_unchecked(family, u) + log_tau_unchecked(family, 2, u) - 2.0 * xc.ln()
        },
        Mode::EndpointSingular,
        &cfg,
    )?
    .exp();
    Ok(num / den)
}

/// `Corr(p̃1(A), p̃2(B))`.
pub fn correlation(
    family: CrmFamily,
    params: GmDependenceParams,
    p0a: f64,
    p0b: f64,
    p0ab: f64,
) -> Result<f64> {
    check_probabilities(p0a, p0b, p0ab)?;
    let va = p0a * (1.0 - p0a);
    let vb = p0b * (1.0 - p0b);
    if va == 0.0 || vb == 0.0 {
        return domain("correlation undefined when P0(A) or P0(B) is 0 or 1");
    }
    let i = dependence_i(family, params)?;
    Ok((1.0 - params.z) * (p0ab - p0a * p0b) / (va * vb).sqrt() * i)
}

/// Dependence summary for one pair of sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceReport {
    pub correlation: f64,
    pub i_cz: f64,
    pub mixed_moment: f64,
}

pub fn dependence_report(
    family: CrmFamily,
    params: GmDependenceParams,
    p0a: f64,
    p0b: f64,
    p0ab: f64,
) -> Result<DependenceReport> {
    Ok(DependenceReport {
        correlation: correlation(family, params, p0a, p0b, p0ab)?,
        i_cz: dependence_i(family, params)?,
        mixed_moment: mixed_moment(family, params, p0a, p0b, p0ab)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;

    fn fd(f1: &[u64], f2: &[u64], q1: &[u64], q2: &[u64]) -> FrequencyData {
        FrequencyData::from_split(f1.to_vec(), f2.to_vec(), q1, q2).unwrap()
    }

    fn ewens(c: f64, freq: &[u64]) -> f64 {
        let n: u64 = freq.iter().sum();
        let mut v = freq.len() as f64 * c.ln() + ln_gamma(c) - ln_gamma(c + n as f64);
        for &m in freq {
            v += ln_gamma(m as f64);
        }
        v.exp()
    }

    #[test]
    fn frequency_validation() {
        assert!(FrequencyData::new(3, 2, vec![2], vec![1], vec![2]).is_ok());
        assert!(FrequencyData::new(3, 2, vec![2], vec![1], vec![3]).is_err());
        assert!(FrequencyData::new(3, 0, vec![2], vec![], vec![]).is_err());
        assert!(FrequencyData::new(2, 2, vec![], vec![], vec![3]).is_err());
        assert!(FrequencyData::new(2, 2, vec![], vec![], vec![4]).is_ok());
        assert!(FrequencyData::new(2, 2, vec![], vec![], vec![2, 2]).is_ok());
    }

    #[test]
    fn single_observation() {
        let f = fd(&[1], &[], &[], &[]);
        assert!((peppf_dirichlet(1.3, 0.4, &f).unwrap() - 1.0).abs() < 1e-14);
        assert!((peppf_stable(0.4, 0.4, &f).unwrap() - 1.0).abs() < 1e-14);
        let g = peppf_general(
            CrmFamily::Gamma,
            GmDependenceParams::new(1.3, 0.4).unwrap(),
            &f,
        )
        .unwrap();
        assert!((g - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dirichlet_one_sample_is_ewens() {
        for &c in &[0.5, 1.0, 3.0] {
            for f in [vec![1u64, 1], vec![3, 2, 1], vec![5]] {
                let got = peppf_dirichlet(c, 0.6, &fd(&f, &[], &[], &[])).unwrap();
                let want = ewens(c, &f);
                assert!(((got - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shared_probability_pair() {
        let p = GmDependenceParams::new(1.0, 0.5).unwrap();
        let shared = peppf_dirichlet(1.0, 0.5, &fd(&[], &[], &[1], &[1])).unwrap();
        let apart = peppf_dirichlet(1.0, 0.5, &fd(&[1], &[1], &[], &[])).unwrap();
        assert!((shared + apart - 1.0).abs() < 1e-8);
        let direct = p.c * (1.0 - p.z) * pair_integral(CrmFamily::Gamma, p).unwrap();
        assert!((shared - direct).abs() < 1e-8);
    }

    #[test]
    fn independence_forbids_sharing() {
        let f = fd(&[1], &[2], &[1], &[1]);
        assert_eq!(peppf_dirichlet(2.0, 1.0, &f).unwrap(), 0.0);
        assert_eq!(peppf_stable(0.5, 1.0, &f).unwrap(), 0.0);
    }

    #[test]
    fn stable_pair_sums_to_one() {
        let shared = peppf_stable(0.5, 0.3, &fd(&[], &[], &[1], &[1])).unwrap();
        let apart = peppf_stable(0.5, 0.3, &fd(&[1], &[1], &[], &[])).unwrap();
        assert!((shared + apart - 1.0).abs() < 1e-10);
    }

    #[test]
    fn label_sum_marginalizes() {
        let f = fd(&[2, 1], &[1, 3], &[1], &[2]);
        for model in [
            PartitionModel::Dirichlet { c: 1.7, z: 0.35 },
            PartitionModel::Stable {
                sigma: 0.45,
                z: 0.35,
            },
        ] {
            let total: f64 = LabelAssignment::all(2, 2)
                .map(|l| {
                    ln_label_conditional_density(&model, &f, &l, &Precision::high())
                        .unwrap()
                        .exp()
                })
                .sum();
            let p = ln_peppf(&model, &f, &Precision::high()).unwrap().exp();
            assert!(((total - p) / p).abs() < 1e-10);
        }
    }

    #[test]
    fn label_mass_vanishes_at_independence() {
        let f = fd(&[2], &[1], &[], &[]);
        let l = LabelAssignment {
            zeta1: vec![false],
            zeta2: vec![true],
        };
        let v = label_conditional_density(
            CrmFamily::Gamma,
            GmDependenceParams::new(1.0, 1.0).unwrap(),
            &f,
            &l,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn label_mass_permutation_invariant() {
        let model = PartitionModel::Stable { sigma: 0.3, z: 0.6 };
        let a = fd(&[3, 1, 2], &[2, 1], &[], &[]);
        let b = fd(&[1, 2, 3], &[1, 2], &[], &[]);
        let la = LabelAssignment {
            zeta1: vec![true, false, true],
            zeta2: vec![false, true],
        };
        let lb = LabelAssignment {
            zeta1: vec![false, true, true],
            zeta2: vec![true, false],
        };
        let va = ln_label_conditional_density(&model, &a, &la, &Precision::high()).unwrap();
        let vb = ln_label_conditional_density(&model, &b, &lb, &Precision::high()).unwrap();
        assert!((va - vb).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_closed_form_matches_integral() {
        let p = GmDependenceParams::new(1.5, 0.4).unwrap();
        for f in [
            fd(&[2, 1], &[1], &[], &[]),
            fd(&[1], &[], &[1], &[2]),
            fd(&[], &[2], &[2], &[1]),
        ] {
            let a = peppf_dirichlet(p.c, p.z, &f).unwrap();
            let b = peppf_general(CrmFamily::Gamma, p, &f).unwrap();
            assert!(((a - b) / a).abs() < 1e-7, "{f:?}: {a} vs {b}");
        }
    }

    #[test]
    fn stable_closed_form_matches_integral() {
        let p = GmDependenceParams::new(2.0, 0.7).unwrap();
        let fam = CrmFamily::Stable(0.4);
        for f in [
            fd(&[2, 1], &[1], &[], &[]),
            fd(&[1], &[], &[1], &[2]),
            fd(&[3], &[], &[], &[]),
        ] {
            let a = peppf_stable(0.4, p.z, &f).unwrap();
            let b = peppf_general(fam, p, &f).unwrap();
            assert!(((a - b) / a).abs() < 1e-7, "{f:?}: {a} vs {b}");
        }
    }

    #[test]
    fn general_refuses_large_input() {
        let f = fd(&[13], &[], &[], &[]);
        assert!(matches!(
            peppf_general(
                CrmFamily::Gamma,
                GmDependenceParams::new(1.0, 0.5).unwrap(),
                &f
            ),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn small_normalization() {
        for (n1, n2) in [(1, 1), (2, 1), (2, 2)] {
            let total: f64 = enumerate_partitions(n1, n2)
                .unwrap()
                .map(|p| peppf_dirichlet(0.8, 0.3, &p.frequency_data()).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dependence_limits() {
        let g = CrmFamily::Gamma;
        let ind = GmDependenceParams::new(1.0, 1.0).unwrap();
        assert_eq!(mixed_moment(g, ind, 0.3, 0.6, 0.2).unwrap(), 0.3 * 0.6);
        let p = GmDependenceParams::new(1.0, 0.5).unwrap();
        assert!((mixed_moment(g, p, 1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(mixed_moment(g, p, 0.3, 0.6, 0.4).is_err());
        let s = CrmFamily::Stable(0.5);
        let full = GmDependenceParams::new(1.0, 0.0).unwrap();
        assert!((dependence_i(s, full).unwrap() - 1.0).abs() < 1e-10);
        let r = dependence_report(g, p, 0.5, 0.5, 0.5).unwrap();
        assert!((r.correlation - 0.5 * r.i_cz).abs() < 1e-14);
    }

    #[test]
    fn gamma_i_matches_definition() {
        for &(c, z) in &[(1.0, 0.5), (2.0, 1.0)] {
            let p = GmDependenceParams::new(c, z).unwrap();
            let a = dependence_i(CrmFamily::Gamma, p).unwrap();
            let b = dependence_i_by_quadrature(CrmFamily::Gamma, p).unwrap();
            assert!((a - b).abs() < 1e-6, "c={c} z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn stable_i_matches_definition() {
        let p = GmDependenceParams::new(1.0, 0.4).unwrap();
        let a = dependence_i(CrmFamily::Stable(0.5), p).unwrap();
        let b = dependence_i_by_quadrature(CrmFamily::Stable(0.5), p).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn subset_profile_counts() {
        let p = subset_profiles(&[1, 1, 2]);
        let total: f64 = p.iter().map(|x| x.2).sum();
        assert_eq!(total, 8.0);
        assert!(p.contains(&(2, 2, 1.0)));
        assert!(p.contains(&(2, 1, 1.0)));
        assert!(p.contains(&(1, 1, 2.0)));
    }

    #[test]
    fn invalid_models_rejected() {
        let f = fd(&[1], &[], &[], &[]);
        for m in [
            PartitionModel::Dirichlet { c: 1.0, z: 2.0 },
            PartitionModel::Dirichlet { c: 0.0, z: 0.5 },
            PartitionModel::Stable { sigma: 1.0, z: 0.5 },
        ] {
            assert!(ln_peppf(&m, &f, &Precision::high()).is_err(), "{m:?}");
        }
    }
}
