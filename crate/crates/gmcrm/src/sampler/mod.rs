//! Marginal Gibbs sampler for the two-sample mixture.
//!
//! Each observation carries the label of its cluster (idiosyncratic or
//! common). Conditional on the labels the observations are seated by a
//! Pólya urn restricted to the urn of their label; labels, unique values and
//! hyperparameters are then refreshed in turn.

mod density;
mod run;
mod state;

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

pub use density::{
    trapezoid, DensityAccumulator, DensityGrid, MixtureComponent, PredictiveMixture,
};
pub use run::{run_chains, ChainOutput, RunOutput, RunSettings, Summary};
pub use state::ChainState;

use crate::error::{domain, Error, Result};
use crate::model::{ln_kernel_density, Hyperpriors, NigBase, SuffStats};
use crate::partition::{Sample, Target, Urn};
use crate::peppf::{ln_label_core, LabelStats, PartitionModel, Precision};
use crate::specialfn::ln_poch;

/// Which GM-dependent process drives the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Dirichlet,
    Stable,
}

/// Two samples of real observations; the second may be empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoSampleData {
    pub x: [Vec<f64>; 2],
}

impl TwoSampleData {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        if x1.is_empty() {
            return domain("sample 1 must not be empty");
        }
        if x1.iter().chain(&x2).any(|v| !v.is_finite()) {
            return domain("observations must be finite");
        }
        Ok(Self { x: [x1, x2] })
    }

    pub fn n(&self, s: Sample) -> usize {
        self.x[s.idx()].len()
    }

    pub fn pooled_mean(&self) -> f64 {
        let n = self.x[0].len() + self.x[1].len();
        self.x.iter().flatten().sum::<f64>() / n as f64
    }
}

/// Starting values of the hyperparameters. `m = None` starts at the prior
/// mean `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialValues {
    pub z: f64,
    pub c: f64,
    pub sigma: f64,
    pub m: Option<f64>,
    pub tau: f64,
}

impl Default for InitialValues {
    fn default() -> Self {
        Self {
            z: 0.5,
            c: 1.0,
            sigma: 0.5,
            m: None,
            tau: 100.0,
        }
    }
}

/// Parameters held at their initial values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FixedParams {
    pub z: bool,
    pub c: bool,
    pub sigma: bool,
    pub m: bool,
    pub tau: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub model: ModelKind,
    pub hyper: Hyperpriors,
    pub init: InitialValues,
    pub fixed: FixedParams,
    /// Cells of the griddy Gibbs updates for `z` and `σ`.
    pub grid_cells: usize,
    /// Initial random-walk step of the `log c` update.
    pub c_step: f64,
    /// With the likelihood off the chain targets the prior of the partition.
    pub likelihood: bool,
    pub precision: Precision,
}

impl SamplerConfig {
    pub fn new(model: ModelKind, hyper: Hyperpriors) -> Self {
        Self {
            model,
            hyper,
            init: InitialValues::default(),
            fixed: FixedParams::default(),
            grid_cells: 100,
            c_step: 0.5,
            likelihood: true,
            precision: Precision::sampler(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        let i = &self.init;
        if !(0.0..=1.0).contains(&i.z) || !(i.z > 0.0 && i.z < 1.0 || self.fixed.z) {
            return domain(format!(
                "initial z must lie in (0,1) unless fixed, got {}",
                i.z
            ));
        }
        if !(i.c > 0.0 && i.c.is_finite()) {
            return domain(format!("initial c must be positive, got {}", i.c));
        }
        if !(i.sigma > 0.0 && i.sigma < 1.0) {
            return domain(format!("initial sigma must lie in (0,1), got {}", i.sigma));
        }
        if !(i.tau > 0.0 && i.tau.is_finite()) || i.m.is_some_and(|m| !m.is_finite()) {
            return domain("initial tau must be positive and m finite");
        }
        if self.grid_cells < 2 {
            return domain("grid_cells must be at least 2");
        }
        if !(self.c_step > 0.0) {
            return domain("c_step must be positive");
        }
        Ok(())
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    pub k_x: usize,
    pub k_y: usize,
    pub k_shared: usize,
    pub z: f64,
    /// `c` for Dirichlet runs, `σ` for stable runs.
    pub family_param: f64,
    pub m: f64,
    pub tau: f64,
    /// Log of the partition-and-label mass plus the kernel log-likelihood.
    pub log_joint: f64,
}

/// Counters of the random-walk update for `c` and of rejected moves.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainStats {
    pub c_proposals: u64,
    pub c_accepted: u64,
    pub numeric_rejections: u64,
}

/// Memo of `ln_label_core` for the current partition parameters.
#[derive(Debug, Clone)]
struct CoreCache {
    model: PartitionModel,
    prec: Precision,
    map: HashMap<LabelStats, f64>,
}

impl CoreCache {
    fn new(model: PartitionModel, prec: Precision) -> Self {
        Self {
            model,
            prec,
            map: HashMap::new(),
        }
    }

    fn set_model(&mut self, model: PartitionModel) {
        if model != self.model {
            self.model = model;
            self.map.clear();
        }
    }

    fn get(&mut self, st: &LabelStats) -> Result<f64> {
        if let Some(&v) = self.map.get(st) {
            return Ok(v);
        }
        let v = ln_label_core(&self.model, st, &self.prec)?;
        self.map.insert(*st, v);
        Ok(v)
    }
}

/// A single Markov chain: data, state, random stream and numeric caches.
#[derive(Debug, Clone)]
pub struct Chain {
    data: TwoSampleData,
    cfg: SamplerConfig,
    state: ChainState,
    rng: ChaCha8Rng,
    cache: CoreCache,
    ln_marginal: [Vec<f64>; 2],
    c_step: f64,
    window: (u32, u32),
    pub stats: ChainStats,
}

fn sample_ln_weights<R: Rng + ?Sized>(ln_w: &[f64], rng: &mut R) -> Option<usize> {
    let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return None;
    }
    let w: Vec<f64> = ln_w.iter().map(|&v| (v - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &wi) in w.iter().enumerate() {
        if u < wi {
            return Some(i);
        }
        u -= wi;
    }
    w.iter().rposition(|&wi| wi > 0.0)
}

fn ln_gamma_density_kernel(x: f64, shape: f64, rate: f64) -> f64 {
    (shape - 1.0) * x.ln() - rate * x
}

impl Chain {
    pub fn new(data: TwoSampleData, cfg: SamplerConfig, seed: u64, stream: u64) -> Result<Self> {
        cfg.validate()?;
        if data.x[0].is_empty() {
            return domain("sample 1 must not be empty");
        }
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rng.set_stream(stream);
        let state = ChainState::initial(&data, &cfg, &mut rng);
        let model = state.partition_model(cfg.model);
        let mut chain = Self {
            cache: CoreCache::new(model, cfg.precision),
            ln_marginal: [Vec::new(), Vec::new()],
            c_step: cfg.c_step,
            window: (0, 0),
            stats: ChainStats::default(),
            data,
            cfg,
            state,
            rng,
        };
        chain.refresh_marginals();
        Ok(chain)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn data(&self) -> &TwoSampleData {
        &self.data
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn c_step(&self) -> f64 {
        self.c_step
    }

    /// Replace the state, e.g. to start from a chosen partition.
    pub fn set_state(&mut self, state: ChainState) -> Result<()> {
        state.check(&self.data)?;
        self.state = state;
        self.sync_model();
        self.refresh_marginals();
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn set_state_unchecked(&mut self, state: ChainState) {
        self.state = state;
        self.sync_model();
    }

    pub fn base(&self) -> NigBase {
        NigBase {
            m: self.state.m,
            tau: self.state.tau,
            s: self.cfg.hyper.s,
            big_s: self.cfg.hyper.big_s,
        }
    }

    fn sync_model(&mut self) {
        let m = self.state.partition_model(self.cfg.model);
        self.cache.set_model(m);
    }

    fn refresh_marginals(&mut self) {
        let base = self.base();
        let on = self.cfg.likelihood;
        for s in 0..2 {
            self.ln_marginal[s] = self.data.x[s]
                .iter()
                .map(|&x| if on { base.ln_marginal_density(x) } else { 0.0 })
                .collect();
        }
    }

    fn ln_h(&self, x: f64, id: usize) -> f64 {
        if self.cfg.likelihood {
            ln_kernel_density(x, &self.state.thetas[id])
        } else {
            0.0
        }
    }

    /// `σ` for stable runs, 0 for Dirichlet runs.
    fn sigma0(&self) -> f64 {
        match self.cfg.model {
            ModelKind::Dirichlet => 0.0,
            ModelKind::Stable => self.state.sigma,
        }
    }

    /// Log seating weights of a detached observation with value `x` in
    /// sample `s`, given its label. The new-cluster option comes first.
    /// `ln_m` is the log prior predictive of `x`.
    pub fn seating_options(
        &mut self,
        s: Sample,
        x: f64,
        idio: bool,
        ln_m: f64,
    ) -> Result<Vec<(Target, f64)>> {
        let urn = if idio { Urn::of(s) } else { Urn::Common };
        let mut join = self.state.label_stats(&self.data);
        if idio {
            match s {
                Sample::One => join.nbar1 += 1,
                Sample::Two => join.nbar2 += 1,
            }
        }
        let mut new = join;
        new.k += 1;
        if idio {
            match s {
                Sample::One => new.kt1 += 1,
                Sample::Two => new.kt2 += 1,
            }
        }
        let ln_new = match self.cfg.model {
            ModelKind::Dirichlet => {
                let z = self.state.z;
                self.state.c.ln() + if idio { z.ln() } else { (-z).ln_1p() }
            }
            ModelKind::Stable => self.cache.get(&new)? - self.cache.get(&join)?,
        };
        let sigma0 = self.sigma0();
        let mut out = Vec::with_capacity(self.state.partition.num_blocks() + 1);
        out.push((Target::New, ln_new + ln_m));
        for (id, b) in self.state.partition.blocks() {
            if self.state.urn(id) == urn {
                out.push((
                    Target::Existing(id),
                    (b.total() as f64 - sigma0).ln() + self.ln_h(x, id),
                ));
            }
        }
        Ok(out)
    }

    /// Reseat one observation within the urn of its label.
    pub fn sample_theta(&mut self, s: Sample, j: usize) -> Result<()> {
        let x = self.data.x[s.idx()][j];
        let old = self
            .state
            .partition
            .block_of(s, j)
            .ok_or_else(|| Error::Domain(format!("observation {j} of {s:?} is detached")))?;
        let idio = self.state.urn(old) != Urn::Common;
        let old_theta = self.state.thetas[old];
        self.state.partition.remove_item(s, j)?;
        let ln_m = self.ln_marginal[s.idx()][j];
        let opts = match self.seating_options(s, x, idio, ln_m) {
            Ok(o) => o,
            Err(e) => {
                // put the observation back where it was
                let target = if self.state.partition.block(old).is_some() {
                    Target::Existing(old)
                } else {
                    Target::New
                };
                let id = self.state.partition.insert_item(s, j, target)?;
                self.state.ensure_slot(id);
                self.state.idio[id] = idio;
                self.state.thetas[id] = old_theta;
                self.stats.numeric_rejections += 1;
                return Err(e);
            }
        };
        let ln_w: Vec<f64> = opts.iter().map(|o| o.1).collect();
        let pick = sample_ln_weights(&ln_w, &mut self.rng).ok_or_else(|| {
            Error::Numeric(format!("no admissible seat for observation {j} of {s:?}"))
        })?;
        let target = opts[pick].0;
        let id = self.state.partition.insert_item(s, j, target)?;
        self.state.ensure_slot(id);
        if target == Target::New {
            self.state.idio[id] = idio;
            self.state.thetas[id] = if self.cfg.likelihood {
                self.base()
                    .posterior(&SuffStats::of(&[x]))
                    .draw(&mut self.rng)
            } else {
                self.base().draw(&mut self.rng)
            };
        } else if self
            .state
            .partition
            .block(id)
            .is_some_and(|b| b.is_shared())
        {
            self.state.idio[id] = false;
        }
        Ok(())
    }

    /// `ln P(idiosyncratic)`, `ln P(common)` for an unshared cluster, up to a
    /// shared constant.
    pub fn label_log_weights(&mut self, id: usize) -> Result<[f64; 2]> {
        let b = *self
            .state
            .partition
            .block(id)
            .ok_or_else(|| Error::Domain(format!("block {id} does not exist")))?;
        let s = b
            .side()
            .ok_or_else(|| Error::Domain(format!("block {id} is shared")))?;
        let base = self.state.label_stats(&self.data);
        let n = b.total() as u64;
        let mut off = base;
        if self.state.idio[id] {
            match s {
                Sample::One => {
                    off.nbar1 -= n;
                    off.kt1 -= 1;
                }
                Sample::Two => {
                    off.nbar2 -= n;
                    off.kt2 -= 1;
                }
            }
        }
        let mut on = off;
        match s {
            Sample::One => {
                on.nbar1 += n;
                on.kt1 += 1;
            }
            Sample::Two => {
                on.nbar2 += n;
                on.kt2 += 1;
            }
        }
        Ok([self.cache.get(&on)?, self.cache.get(&off)?])
    }

    /// Resample the label of an unshared cluster.
    pub fn sample_label(&mut self, id: usize) -> Result<()> {
        let [li, lc] = self.label_log_weights(id)?;
        let pick = sample_ln_weights(&[li, lc], &mut self.rng)
            .ok_or_else(|| Error::Numeric(format!("both labels of block {id} have zero mass")))?;
        self.state.idio[id] = pick == 0;
        Ok(())
    }

    /// Redraw every cluster's `(M, V)` from its conjugate posterior.
    pub fn resample_unique_values(&mut self) {
        let base = self.base();
        let ids: Vec<usize> = self.state.partition.blocks().map(|(id, _)| id).collect();
        for id in ids {
            let post = if self.cfg.likelihood {
                let [m1, m2] = self.state.partition.members(id);
                let mut st = SuffStats::default();
                for &j in &m1 {
                    st.push(self.data.x[0][j]);
                }
                for &j in &m2 {
                    st.push(self.data.x[1][j]);
                }
                base.posterior(&st)
            } else {
                base
            };
            self.state.thetas[id] = post.draw(&mut self.rng);
        }
    }

    /// Unnormalized log full conditional of `z` at a point.
    pub fn ln_z_conditional(&self, z: f64) -> Result<f64> {
        let st = self.state.label_stats(&self.data);
        let model = match self.cfg.model {
            ModelKind::Dirichlet => PartitionModel::Dirichlet { c: self.state.c, z },
            ModelKind::Stable => PartitionModel::Stable {
                sigma: self.state.sigma,
                z,
            },
        };
        ln_label_core(&model, &st, &self.cfg.precision)
    }

    /// Unnormalized log full conditional of `σ` at a point.
    pub fn ln_sigma_conditional(&self, sigma: f64) -> Result<f64> {
        let st = self.state.label_stats(&self.data);
        let model = PartitionModel::Stable {
            sigma,
            z: self.state.z,
        };
        let xi: f64 = self
            .state
            .partition
            .blocks()
            .map(|(_, b)| ln_poch(1.0 - sigma, b.total() as u64 - 1))
            .sum();
        Ok(ln_label_core(&model, &st, &self.cfg.precision)? + xi)
    }

    /// Unnormalized log full conditional of `c` (prior included).
    pub fn ln_c_conditional(&self, c: f64) -> Result<f64> {
        let st = self.state.label_stats(&self.data);
        let model = PartitionModel::Dirichlet { c, z: self.state.z };
        let h = &self.cfg.hyper;
        Ok(ln_gamma_density_kernel(c, h.a0, h.b0)
            + ln_label_core(&model, &st, &self.cfg.precision)?)
    }

    fn griddy<F>(&mut self, what: &str, f: F) -> Result<f64>
    where
        F: Fn(&Self, f64) -> Result<f64>,
    {
        let g = self.cfg.grid_cells;
        let mut ln_w = Vec::with_capacity(g);
        for i in 0..g {
            let v = (i as f64 + 0.5) / g as f64;
            ln_w.push(match f(self, v) {
                Ok(l) => l,
                Err(_) => {
                    self.stats.numeric_rejections += 1;
                    f64::NEG_INFINITY
                }
            });
        }
        let cell = sample_ln_weights(&ln_w, &mut self.rng).ok_or_else(|| {
            Error::Numeric(format!(
                "{what} full conditional vanishes on the whole grid"
            ))
        })?;
        let u: f64 = self.rng.random();
        Ok((cell as f64 + u) / g as f64)
    }

    pub fn sample_z(&mut self) -> Result<()> {
        self.state.z = self.griddy("z", |c, z| c.ln_z_conditional(z))?;
        self.sync_model();
        Ok(())
    }

    pub fn sample_sigma(&mut self) -> Result<()> {
        self.state.sigma = self.griddy("sigma", |c, s| c.ln_sigma_conditional(s))?;
        self.sync_model();
        Ok(())
    }

    /// Random-walk Metropolis–Hastings on `log c`.
    pub fn sample_c(&mut self, adapt: bool) -> Result<()> {
        let c = self.state.c;
        let eps: f64 = StandardNormal.sample(&mut self.rng);
        let prop = c * (self.c_step * eps).exp();
        self.stats.c_proposals += 1;
        let accepted = match (self.ln_c_conditional(prop), self.ln_c_conditional(c)) {
            (Ok(lp), Ok(lc)) => {
                let ln_ratio = lp + prop.ln() - lc - c.ln();
                ln_ratio >= 0.0 || self.rng.random::<f64>().ln() < ln_ratio
            }
            (Err(_), Ok(_)) => {
                self.stats.numeric_rejections += 1;
                false
            }
            (_, Err(e)) => return Err(e),
        };
        if accepted {
            self.state.c = prop;
            self.stats.c_accepted += 1;
            self.sync_model();
        }
        if adapt {
            self.window.0 += 1;
            self.window.1 += accepted as u32;
            if self.window.0 == 50 {
                let rate = self.window.1 as f64 / 50.0;
                if rate < 0.25 {
                    self.c_step *= 0.8;
                } else if rate > 0.45 {
                    self.c_step *= 1.25;
                }
                self.window = (0, 0);
            }
        }
        Ok(())
    }

    /// Conjugate draws of `τ` and then `m` given the unique values.
    pub fn sample_tau_m(&mut self) {
        let h = self.cfg.hyper;
        let thetas: Vec<_> = self
            .state
            .partition
            .blocks()
            .map(|(id, _)| self.state.thetas[id])
            .collect();
        if thetas.is_empty() {
            return;
        }
        if !self.cfg.fixed.tau {
            let m = self.state.m;
            let wp: f64 = thetas.iter().map(|t| (t.mean - m).powi(2) / t.var).sum();
            let shape = 0.5 * (h.w + thetas.len() as f64);
            let rate = 0.5 * (h.big_w + wp);
            let prec = Gamma::new(shape, 1.0 / rate)
                .expect("positive parameters")
                .sample(&mut self.rng);
            self.state.tau = 1.0 / prec;
        }
        if !self.cfg.fixed.m {
            let tau = self.state.tau;
            let prec = 1.0 / h.big_a + thetas.iter().map(|t| 1.0 / (tau * t.var)).sum::<f64>();
            let r = h.a / h.big_a + thetas.iter().map(|t| t.mean / (tau * t.var)).sum::<f64>();
            let t = 1.0 / prec;
            let eps: f64 = StandardNormal.sample(&mut self.rng);
            self.state.m = r * t + t.sqrt() * eps;
        }
        self.refresh_marginals();
    }

    /// One full sweep. `adapt` enables step-size tuning of the `c` update.
    pub fn gibbs_iteration(&mut self, adapt: bool) -> Result<()> {
        for s in Sample::BOTH {
            for j in 0..self.data.n(s) {
                match self.sample_theta(s, j) {
                    Ok(()) => {}
                    Err(Error::Invariant(m)) => return Err(Error::Invariant(m)),
                    Err(Error::Domain(m)) => return Err(Error::Domain(m)),
                    Err(_) => {}
                }
            }
        }
        let unshared: Vec<usize> = self
            .state
            .partition
            .blocks()
            .filter(|(_, b)| !b.is_shared())
            .map(|(id, _)| id)
            .collect();
        for id in unshared {
            if self.sample_label(id).is_err() {
                self.stats.numeric_rejections += 1;
            }
        }
        self.resample_unique_values();
        if !self.cfg.fixed.z {
            self.sample_z()?;
        }
        match self.cfg.model {
            ModelKind::Dirichlet if !self.cfg.fixed.c => self.sample_c(adapt)?,
            ModelKind::Stable if !self.cfg.fixed.sigma => self.sample_sigma()?,
            _ => {}
        }
        self.sample_tau_m();
        self.state.iteration += 1;
        self.state.check(&self.data)
    }

    /// Summary of the current state.
    pub fn record(&mut self) -> Result<TraceRecord> {
        let (k1, k2, k0) = self.state.partition.block_counts();
        let st = self.state.label_stats(&self.data);
        let sigma0 = self.sigma0();
        let xi: f64 = self
            .state
            .partition
            .blocks()
            .map(|(_, b)| ln_poch(1.0 - sigma0, b.total() as u64 - 1))
            .sum();
        let mut log_joint = self.cache.get(&st)? + xi;
        for s in Sample::BOTH {
            for (j, &x) in self.data.x[s.idx()].iter().enumerate() {
                let id = self.state.partition.block_of(s, j).expect("attached");
                log_joint += self.ln_h(x, id);
            }
        }
        Ok(TraceRecord {
            iter: self.state.iteration,
            k_x: k1 + k0,
            k_y: k2 + k0,
            k_shared: k0,
            z: self.state.z,
            family_param: match self.cfg.model {
                ModelKind::Dirichlet => self.state.c,
                ModelKind::Stable => self.state.sigma,
            },
            m: self.state.m,
            tau: self.state.tau,
            log_joint,
        })
    }

    /// Predictive law of one more observation in sample `s`, with its label
    /// and seat marginalized.
    pub fn predictive(&mut self, s: Sample) -> Result<PredictiveMixture> {
        let base_st = self.state.label_stats(&self.data);
        let sigma0 = self.sigma0();
        let mut ln_w: Vec<f64> = Vec::new();
        let mut comps: Vec<Option<usize>> = Vec::new();
        for idio in [true, false] {
            let mut join = base_st;
            match s {
                Sample::One => {
                    join.n1 += 1;
                    join.nbar1 += idio as u64;
                }
                Sample::Two => {
                    join.n2 += 1;
                    join.nbar2 += idio as u64;
                }
            }
            let mut new = join;
            new.k += 1;
            if idio {
                match s {
                    Sample::One => new.kt1 += 1,
                    Sample::Two => new.kt2 += 1,
                }
            }
            let lj = self.cache.get(&join)?;
            let ln_new = self.cache.get(&new)?;
            ln_w.push(ln_new);
            comps.push(None);
            let urn = if idio { Urn::of(s) } else { Urn::Common };
            for (id, b) in self.state.partition.blocks() {
                if self.state.urn(id) == urn {
                    ln_w.push(lj + (b.total() as f64 - sigma0).ln());
                    comps.push(Some(id));
                }
            }
        }
        let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Numeric("predictive weights vanish".into()));
        }
        let w: Vec<f64> = ln_w.iter().map(|&v| (v - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut out = PredictiveMixture {
            base: self.base(),
            base_weight: 0.0,
            components: Vec::new(),
        };
        for (wi, c) in w.into_iter().zip(comps) {
            match c {
                None => out.base_weight += wi / total,
                Some(id) => out.components.push(MixtureComponent {
                    weight: wi / total,
                    theta: self.state.thetas[id],
                }),
            }
        }
        Ok(out)
    }

    /// Replace the observations by draws from their current clusters.
    pub fn redraw_data(&mut self) {
        for s in Sample::BOTH {
            for j in 0..self.data.n(s) {
                let id = self.state.partition.block_of(s, j).expect("attached");
                let t = self.state.thetas[id];
                let eps: f64 = StandardNormal.sample(&mut self.rng);
                self.data.x[s.idx()][j] = t.mean + t.var.sqrt() * eps;
            }
        }
        self.refresh_marginals();
    }
}
