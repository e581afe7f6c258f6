use std::collections::BTreeMap;
use std::time::Instant;

use super::{
    Chain, ChainStats, DensityAccumulator, DensityGrid, ModelKind, SamplerConfig, TraceRecord,
    TwoSampleData,
};
use crate::error::{domain, Error, Result};
use crate::partition::Sample;

/// Length and bookkeeping of a run. `iters` counts all sweeps, burn-in
/// included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
    pub chains: usize,
    pub seed: u64,
    pub grid: Option<DensityGrid>,
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iters <= self.burnin {
            return domain(format!(
                "iters ({}) must exceed burnin ({})",
                self.iters, self.burnin
            ));
        }
        if self.thin == 0 || self.chains == 0 {
            return domain("thin and chains must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub trace: Vec<TraceRecord>,
    pub density: [Option<DensityAccumulator>; 2],
    pub stats: ChainStats,
    pub c_step: f64,
}

/// Posterior summaries pooled over chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub draws: usize,
    pub mean_k_x: f64,
    pub mean_k_y: f64,
    pub mean_k_shared: f64,
    pub p_k_x_ge4: f64,
    pub p_k_y_ge4: f64,
    pub mode_k_x: usize,
    pub mode_k_y: usize,
    pub joint_mode: (usize, usize),
    pub k_x_dist: Vec<(usize, f64)>,
    pub k_y_dist: Vec<(usize, f64)>,
    pub mean_z: f64,
    pub mean_family_param: f64,
    pub mean_m: f64,
    pub mean_tau: f64,
    pub c_acceptance: Option<f64>,
    pub numeric_rejections: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub chains: Vec<ChainOutput>,
    /// Pooled density estimates per sample (absent for an empty sample).
    pub densities: [Option<Vec<f64>>; 2],
    pub summary: Summary,
    pub runtime_secs: f64,
}

fn distribution(values: impl Iterator<Item = usize>) -> (Vec<(usize, f64)>, usize) {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut n = 0u64;
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
        n += 1;
    }
    let mode = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or(0, |(&k, _)| k);
    (
        counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect(),
        mode,
    )
}

impl Summary {
    pub fn from_traces(
        traces: &[&[TraceRecord]],
        stats: &[ChainStats],
        model: ModelKind,
    ) -> Result<Self> {
        let all: Vec<&TraceRecord> = traces.iter().flat_map(|t| t.iter()).collect();
        if all.is_empty() {
            return domain("empty trace");
        }
        let n = all.len() as f64;
        let mean = |f: &dyn Fn(&TraceRecord) -> f64| all.iter().map(|r| f(r)).sum::<f64>() / n;
        let (k_x_dist, mode_k_x) = distribution(all.iter().map(|r| r.k_x));
        let (k_y_dist, mode_k_y) = distribution(all.iter().map(|r| r.k_y));
        let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for r in &all {
            *joint.entry((r.k_x, r.k_y)).or_insert(0) += 1;
        }
        let joint_mode = joint
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&k, _)| k)
            .unwrap();
        let proposals: u64 = stats.iter().map(|s| s.c_proposals).sum();
        let accepted: u64 = stats.iter().map(|s| s.c_accepted).sum();
        Ok(Self {
            draws: all.len(),
            mean_k_x: mean(&|r| r.k_x as f64),
            mean_k_y: mean(&|r| r.k_y as f64),
            mean_k_shared: mean(&|r| r.k_shared as f64),
            p_k_x_ge4: mean(&|r| (r.k_x >= 4) as u8 as f64),
            p_k_y_ge4: mean(&|r| (r.k_y >= 4) as u8 as f64),
            mode_k_x,
            mode_k_y,
            joint_mode,
            k_x_dist,
            k_y_dist,
            mean_z: mean(&|r| r.z),
            mean_family_param: mean(&|r| r.family_param),
            mean_m: mean(&|r| r.m),
            mean_tau: mean(&|r| r.tau),
            c_acceptance: (model == ModelKind::Dirichlet && proposals > 0)
                .then(|| accepted as f64 / proposals as f64),
            numeric_rejections: stats.iter().map(|s| s.numeric_rejections).sum(),
        })
    }
}

fn run_one(
    data: &TwoSampleData,
    cfg: &SamplerConfig,
    set: &RunSettings,
    chain_index: usize,
) -> Result<ChainOutput> {
    let mut chain = Chain::new(data.clone(), *cfg, set.seed, chain_index as u64)?;
    let mut trace = Vec::with_capacity(((set.iters - set.burnin) / set.thin) as usize);
    let mut density: [Option<DensityAccumulator>; 2] = [None, None];
    if let Some(g) = set.grid {
        for s in Sample::BOTH {
            if data.n(s) > 0 {
                density[s.idx()] = Some(DensityAccumulator::new(g));
            }
        }
    }
    for it in 0..set.iters {
        let burning = it < set.burnin;
        chain
            .gibbs_iteration(burning)
            .map_err(|e| Error::Numeric(format!("chain {chain_index}, sweep {}: {e}", it + 1)))?;
        if burning || (it + 1 - set.burnin) % set.thin != 0 {
            continue;
        }
        trace.push(chain.record()?);
        for s in Sample::BOTH {
            if let Some(acc) = density[s.idx()].as_mut() {
                let mix = chain.predictive(s)?;
                acc.add(&mix);
            }
        }
    }
    Ok(ChainOutput {
        trace,
        density,
        stats: chain.stats,
        c_step: chain.c_step(),
    })
}

/// Run independent chains concurrently; chain `i` uses stream `i` of the
/// seed.
pub fn run_chains(
    data: &TwoSampleData,
    cfg: &SamplerConfig,
    set: &RunSettings,
) -> Result<RunOutput> {
    set.validate()?;
    cfg.validate()?;
    let start = Instant::now();
    let results: Vec<Result<ChainOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..set.chains)
            .map(|i| scope.spawn(move || run_one(data, cfg, set, i)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Numeric("chain thread panicked".into())))
            })
            .collect()
    });
    let chains = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut densities: [Option<Vec<f64>>; 2] = [None, None];
    for s in 0..2 {
        let mut merged: Option<DensityAccumulator> = None;
        for c in &chains {
            if let Some(acc) = &c.density[s] {
                match merged.as_mut() {
                    None => merged = Some(acc.clone()),
                    Some(m) => m.merge(acc),
                }
            }
        }
        densities[s] = merged.map(|m| m.estimate()).transpose()?;
    }
    let traces: Vec<&[TraceRecord]> = chains.iter().map(|c| c.trace.as_slice()).collect();
    let stats: Vec<ChainStats> = chains.iter().map(|c| c.stats).collect();
    let summary = Summary::from_traces(&traces, &stats, cfg.model)?;
    Ok(RunOutput {
        chains,
        densities,
        summary,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
