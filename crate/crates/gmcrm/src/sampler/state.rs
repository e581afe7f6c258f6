use rand::Rng;

use super::{ModelKind, SamplerConfig, TwoSampleData};
use crate::error::{Error, Result};
use crate::model::{ClusterParam, NigBase, SuffStats};
use crate::partition::{Sample, TwoSamplePartition, Urn};
use crate::peppf::{LabelStats, PartitionModel};

/// Full Gibbs state. `idio` and `thetas` are indexed by block id; entries
/// of dead slots are stale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub partition: TwoSamplePartition,
    /// Idiosyncratic flag of each block; always false for shared blocks.
    pub idio: Vec<bool>,
    pub thetas: Vec<ClusterParam>,
    pub z: f64,
    pub c: f64,
    pub sigma: f64,
    pub m: f64,
    pub tau: f64,
    pub iteration: u64,
}

impl ChainState {
    /// One block per nonempty sample, idiosyncratic unless `z = 0`.
    pub fn initial<R: Rng + ?Sized>(
        data: &TwoSampleData,
        cfg: &SamplerConfig,
        rng: &mut R,
    ) -> Self {
        let n1 = data.x[0].len();
        let n2 = data.x[1].len();
        let partition = TwoSamplePartition::from_labels(&vec![0; n1], &vec![1; n2]);
        let i = cfg.init;
        let m = i.m.unwrap_or(cfg.hyper.a);
        let base = NigBase {
            m,
            tau: i.tau,
            s: cfg.hyper.s,
            big_s: cfg.hyper.big_s,
        };
        let mut thetas = Vec::new();
        for (id, _) in partition.blocks() {
            let [a, b] = partition.members(id);
            let xs: Vec<f64> = a
                .iter()
                .map(|&j| data.x[0][j])
                .chain(b.iter().map(|&j| data.x[1][j]))
                .collect();
            let post = if cfg.likelihood {
                base.posterior(&SuffStats::of(&xs))
            } else {
                base
            };
            if thetas.len() <= id {
                thetas.resize(id + 1, ClusterParam { mean: m, var: 1.0 });
            }
            thetas[id] = post.draw(rng);
        }
        let cap = partition.slot_capacity();
        thetas.resize(cap, ClusterParam { mean: m, var: 1.0 });
        Self {
            partition,
            idio: vec![i.z > 0.0; cap],
            thetas,
            z: i.z,
            c: i.c,
            sigma: i.sigma,
            m,
            tau: i.tau,
            iteration: 0,
        }
    }

    pub(crate) fn ensure_slot(&mut self, id: usize) {
        if self.idio.len() <= id {
            self.idio.resize(id + 1, false);
            let fill = ClusterParam {
                mean: self.m,
                var: 1.0,
            };
            self.thetas.resize(id + 1, fill);
        }
    }

    pub fn urn(&self, id: usize) -> Urn {
        match self.partition.block(id).and_then(|b| b.side()) {
            Some(s) if self.idio[id] => Urn::of(s),
            _ => Urn::Common,
        }
    }

    pub fn partition_model(&self, kind: ModelKind) -> PartitionModel {
        match kind {
            ModelKind::Dirichlet => PartitionModel::Dirichlet {
                c: self.c,
                z: self.z,
            },
            ModelKind::Stable => PartitionModel::Stable {
                sigma: self.sigma,
                z: self.z,
            },
        }
    }

    /// Label statistics of the attached observations; sample sizes are taken
    /// from the data so that a detached observation still counts in `n`.
    pub fn label_stats(&self, data: &TwoSampleData) -> LabelStats {
        let mut st = LabelStats {
            n1: data.x[0].len() as u64,
            n2: data.x[1].len() as u64,
            nbar1: 0,
            nbar2: 0,
            k: 0,
            kt1: 0,
            kt2: 0,
        };
        for (id, b) in self.partition.blocks() {
            st.k += 1;
            match b.side() {
                Some(Sample::One) if self.idio[id] => {
                    st.nbar1 += b.count[0] as u64;
                    st.kt1 += 1;
                }
                Some(Sample::Two) if self.idio[id] => {
                    st.nbar2 += b.count[1] as u64;
                    st.kt2 += 1;
                }
                _ => {}
            }
        }
        st
    }

    /// Partition invariants, label degeneracy of shared blocks and validity
    /// of the cluster parameters.
    pub fn check(&self, data: &TwoSampleData) -> Result<()> {
        self.partition
            .check_invariants()
            .map_err(|e| Error::Invariant(e.to_string()))?;
        for s in Sample::BOTH {
            if self.partition.n(s) != data.n(s) {
                return Err(Error::Invariant(format!(
                    "{s:?} has {} observations, data {}",
                    self.partition.n(s),
                    data.n(s)
                )));
            }
        }
        if self.idio.len() < self.partition.slot_capacity()
            || self.thetas.len() < self.partition.slot_capacity()
        {
            return Err(Error::Invariant(
                "side tables shorter than the block table".into(),
            ));
        }
        for (id, b) in self.partition.blocks() {
            if b.is_shared() && self.idio[id] {
                return Err(Error::Invariant(format!(
                    "shared block {id} carries an idiosyncratic label"
                )));
            }
            let t = self.thetas[id];
            if !(t.var > 0.0 && t.var.is_finite() && t.mean.is_finite()) {
                return Err(Error::Invariant(format!(
                    "block {id} has invalid parameters {t:?}"
                )));
            }
        }
        Ok(())
    }
}
