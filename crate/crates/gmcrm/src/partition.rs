//! Two-sample partition bookkeeping and small-n enumeration.

use crate::error::{Error, Result};
use crate::peppf::FrequencyData;

/// Which sample an observation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sample {
    One,
    Two,
}

impl Sample {
    #[inline]
    pub fn idx(self) -> usize {
        match self {
            Sample::One => 0,
            Sample::Two => 1,
        }
    }

    pub fn other(self) -> Sample {
        match self {
            Sample::One => Sample::Two,
            Sample::Two => Sample::One,
        }
    }

    pub const BOTH: [Sample; 2] = [Sample::One, Sample::Two];
}

/// Member counts of one block, per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Block {
    pub count: [usize; 2],
}

impl Block {
    pub fn total(&self) -> usize {
        self.count[0] + self.count[1]
    }

    pub fn is_shared(&self) -> bool {
        self.count[0] > 0 && self.count[1] > 0
    }

    /// The only sample present, if the block is unshared and nonempty.
    pub fn side(&self) -> Option<Sample> {
        match (self.count[0] > 0, self.count[1] > 0) {
            (true, false) => Some(Sample::One),
            (false, true) => Some(Sample::Two),
            _ => None,
        }
    }
}

/// Where to put a detached observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Existing(usize),
    New,
}

/// Partition of `(X^(n1), Y^(n2))`. Block ids are stable slot indices; freed
/// slots are reused.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSamplePartition {
    assign: [Vec<Option<usize>>; 2],
    slots: Vec<Option<Block>>,
    free: Vec<usize>,
}

impl TwoSamplePartition {
    /// Build from per-observation block labels (any integers; equal labels
    /// mean the same block, across samples too).
    pub fn from_labels(labels1: &[usize], labels2: &[usize]) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let mut slots: Vec<Option<Block>> = Vec::new();
        let mut assign = [
            Vec::with_capacity(labels1.len()),
            Vec::with_capacity(labels2.len()),
        ];
        for (s, labels) in [labels1, labels2].iter().enumerate() {
            for &l in labels.iter() {
                let id = match map.iter().find(|(k, _)| *k == l) {
                    Some(&(_, id)) => id,
                    None => {
                        slots.push(Some(Block::default()));
                        map.push((l, slots.len() - 1));
                        slots.len() - 1
                    }
                };
                slots[id].as_mut().unwrap().count[s] += 1;
                assign[s].push(Some(id));
            }
        }
        Self {
            assign,
            slots,
            free: Vec::new(),
        }
    }

    /// Every observation in one block.
    pub fn single_block(n1: usize, n2: usize) -> Self {
        Self::from_labels(&vec![0; n1], &vec![0; n2])
    }

    pub fn n(&self, s: Sample) -> usize {
        self.assign[s.idx()].len()
    }

    pub fn block_of(&self, s: Sample, index: usize) -> Option<usize> {
        self.assign[s.idx()].get(index).copied().flatten()
    }

    pub fn block(&self, id: usize) -> Option<&Block> {
        self.slots.get(id).and_then(|b| b.as_ref())
    }

    /// Live blocks as `(id, block)`.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, &Block)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_ref().map(|b| (i, b)))
    }

    pub fn num_blocks(&self) -> usize {
        self.slots.len() - self.free.len()
    }

    /// Upper bound on block ids, for id-indexed side tables.
    pub fn slot_capacity(&self) -> usize {
        self.slots.len()
    }

    /// `(k1, k2, k0)`: sample-1-only, sample-2-only and shared block counts.
    pub fn block_counts(&self) -> (usize, usize, usize) {
        let mut k = (0, 0, 0);
        for (_, b) in self.blocks() {
            match b.side() {
                Some(Sample::One) => k.0 += 1,
                Some(Sample::Two) => k.1 += 1,
                None => k.2 += 1,
            }
        }
        k
    }

    /// Detach an observation; its block is deleted if it empties.
    /// Returns the former block id and whether it was deleted.
    pub fn remove_item(&mut self, s: Sample, index: usize) -> Result<(usize, bool)> {
        let slot = self.assign[s.idx()]
            .get_mut(index)
            .ok_or_else(|| Error::Domain(format!("observation {index} out of range in {s:?}")))?;
        let id = slot.take().ok_or_else(|| {
            Error::Domain(format!("observation {index} of {s:?} already detached"))
        })?;
        let block = self.slots[id].as_mut().expect("assigned to a live block");
        block.count[s.idx()] -= 1;
        if block.total() == 0 {
            self.slots[id] = None;
            self.free.push(id);
            Ok((id, true))
        } else {
            Ok((id, false))
        }
    }

    /// Attach a detached observation. Returns the block id used.
    pub fn insert_item(&mut self, s: Sample, index: usize, target: Target) -> Result<usize> {
        match self.assign[s.idx()].get(index) {
            None => {
                return Err(Error::Domain(format!(
                    "observation {index} out of range in {s:?}"
                )))
            }
            Some(Some(_)) => {
                return Err(Error::Domain(format!(
                    "observation {index} of {s:?} is attached"
                )))
            }
            Some(None) => {}
        }
        let id = match target {
            Target::Existing(id) => {
                if self.block(id).is_none() {
                    return Err(Error::Domain(format!("block {id} does not exist")));
                }
                id
            }
            Target::New => match self.free.pop() {
                Some(id) => {
                    self.slots[id] = Some(Block::default());
                    id
                }
                None => {
                    self.slots.push(Some(Block::default()));
                    self.slots.len() - 1
                }
            },
        };
        self.slots[id].as_mut().unwrap().count[s.idx()] += 1;
        self.assign[s.idx()][index] = Some(id);
        Ok(id)
    }

    /// Members of a block, per sample.
    pub fn members(&self, id: usize) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for s in 0..2 {
            for (i, a) in self.assign[s].iter().enumerate() {
                if *a == Some(id) {
                    out[s].push(i);
                }
            }
        }
        out
    }

    /// Block counts recomputed from the raw assignment vectors.
    pub fn recount(&self) -> Vec<Option<Block>> {
        let mut out = vec![None::<Block>; self.slots.len()];
        for s in 0..2 {
            for a in self.assign[s].iter().flatten() {
                out[*a].get_or_insert_with(Block::default).count[s] += 1;
            }
        }
        out
    }

    /// Maintained counts agree with the assignments and every observation is attached.
    pub fn check_invariants(&self) -> Result<()> {
        if self.assign.iter().any(|v| v.iter().any(|a| a.is_none())) {
            return Err(Error::Numeric(
                "detached observation in a settled partition".into(),
            ));
        }
        if self.recount() != self.slots {
            return Err(Error::Numeric(
                "block counts disagree with assignments".into(),
            ));
        }
        Ok(())
    }

    /// Restricted-growth labels over sample 1 then sample 2 (blocks numbered
    /// by first member). Equal partitions give equal vectors.
    pub fn canonical(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.slots.len()];
        let mut next = 0;
        let mut out = Vec::with_capacity(self.assign[0].len() + self.assign[1].len());
        for s in 0..2 {
            for a in &self.assign[s] {
                let id = a.expect("canonical form needs attached observations");
                if map[id] == usize::MAX {
                    map[id] = next;
                    next += 1;
                }
                out.push(map[id]);
            }
        }
        out
    }

    /// Frequencies in canonical block order.
    pub fn frequency_data(&self) -> FrequencyData {
        let mut seen = vec![false; self.slots.len()];
        let mut f1 = Vec::new();
        let mut f2 = Vec::new();
        let mut q1 = Vec::new();
        let mut q2 = Vec::new();
        for s in 0..2 {
            for a in self.assign[s].iter().flatten() {
                if seen[*a] {
                    continue;
                }
                seen[*a] = true;
                let b = self.slots[*a].unwrap();
                match b.side() {
                    Some(Sample::One) => f1.push(b.count[0] as u64),
                    Some(Sample::Two) => f2.push(b.count[1] as u64),
                    None => {
                        q1.push(b.count[0] as u64);
                        q2.push(b.count[1] as u64);
                    }
                }
            }
        }
        FrequencyData::from_split(f1, f2, &q1, &q2).expect("partition frequencies are consistent")
    }
}

/// Label of a cluster: which urn produced its atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Urn {
    Common,
    First,
    Second,
}

impl Urn {
    /// The idiosyncratic urn of a sample.
    pub fn of(s: Sample) -> Urn {
        match s {
            Sample::One => Urn::First,
            Sample::Two => Urn::Second,
        }
    }
}

/// Labels of the unshared clusters, aligned with `FrequencyData::freq1` and
/// `freq2`; `true` marks an idiosyncratic cluster (label 1 or 2), `false` the
/// common urn. Shared clusters always belong to the common urn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    pub zeta1: Vec<bool>,
    pub zeta2: Vec<bool>,
}

impl LabelAssignment {
    pub fn k_tilde1(&self) -> usize {
        self.zeta1.iter().filter(|&&b| b).count()
    }

    pub fn k_tilde2(&self) -> usize {
        self.zeta2.iter().filter(|&&b| b).count()
    }

    /// All `2^(k1+k2)` label vectors.
    pub fn all(k1: usize, k2: usize) -> impl Iterator<Item = LabelAssignment> {
        let k = k1 + k2;
        assert!(k < 40, "label enumeration too large");
        (0u64..(1u64 << k)).map(move |bits| LabelAssignment {
            zeta1: (0..k1).map(|j| bits >> j & 1 == 1).collect(),
            zeta2: (0..k2).map(|j| bits >> (k1 + j) & 1 == 1).collect(),
        })
    }
}

/// Largest `n1 + n2` accepted by [`enumerate_partitions`].
pub const ENUMERATION_LIMIT: usize = 10;

/// Every set partition of the `n1 + n2` labeled observations, once each.
pub fn enumerate_partitions(
    n1: usize,
    n2: usize,
) -> Result<impl Iterator<Item = TwoSamplePartition>> {
    let n = n1 + n2;
    if n > ENUMERATION_LIMIT {
        return Err(Error::Refused(format!(
            "enumeration of {n} observations exceeds the limit of {ENUMERATION_LIMIT}"
        )));
    }
    Ok(RestrictedGrowth::new(n)
        .map(move |rgs| TwoSamplePartition::from_labels(&rgs[..n1], &rgs[n1..])))
}

/// Restricted growth strings of length `n` in lexicographic order.
struct RestrictedGrowth {
    a: Vec<usize>,
    max: Vec<usize>,
    done: bool,
}

impl RestrictedGrowth {
    fn new(n: usize) -> Self {
        Self {
            a: vec![0; n],
            max: vec![0; n],
            done: false,
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.a.clone();
        let n = self.a.len();
        // advance: rightmost position that can grow
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let bound = self.max[i - 1] + 1;
            if self.a[i] < bound {
                self.a[i] += 1;
                self.max[i] = self.max[i - 1].max(self.a[i]);
                for j in i + 1..n {
                    self.a[j] = 0;
                    self.max[j] = self.max[j - 1];
                }
                break;
            }
        }
        Some(out)
    }
}
