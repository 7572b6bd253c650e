//! Chain partitions of `2^[n]` and of the upper half `Q`.

mod alpha;
mod construct;
mod io;
mod schedule;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::lattice::{binomial, GroundSet, Subset};
use crate::signature::{chain_from_parts, match_linear};

pub use alpha::{alpha_constant, alpha_partial_sum, k_for_epsilon, AlphaInterval};
pub use construct::{
    mirror_closure, partition_max_size, partition_min_size, uniform_rank_symmetric_partition,
    UniformReport,
};
pub use io::{read_partition, write_partition, PartitionFile, PartitionHeader};
pub use schedule::{f_schedule, FSchedule};
pub use verify::{verify_chains, verify_partition, Failure, Requirements, Verdict};

/// The part of the lattice a partition claims to cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universe {
    /// All of `2^[n]`.
    Lattice,
    /// `Q = [n]^(>= n/2)`.
    Q,
    /// Ranks `lo..=hi`, all inside `Q`.
    QLevels { lo: u32, hi: u32 },
}

impl Universe {
    pub fn contains_rank(self, ground: GroundSet, k: u32) -> bool {
        match self {
            Universe::Lattice => k <= ground.n(),
            Universe::Q => ground.rank_in_q(k) && k <= ground.n(),
            Universe::QLevels { lo, hi } => lo <= k && k <= hi,
        }
    }

    /// `true` when every member lies in `Q`, so chains are also checked under `<`.
    pub fn within_q(self) -> bool {
        !matches!(self, Universe::Lattice)
    }

    pub fn ranks(self, ground: GroundSet) -> std::ops::RangeInclusive<u32> {
        match self {
            Universe::Lattice => 0..=ground.n(),
            Universe::Q => ground.q_bottom_rank()..=ground.n(),
            Universe::QLevels { lo, hi } => lo..=hi,
        }
    }

    pub fn size(self, ground: GroundSet) -> u64 {
        self.ranks(ground).map(|k| binomial(ground.n(), k)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Btk,
    Kleitman,
    UniformPipeline,
    /// The pipeline fell back to one min-size pass over all of `Q`.
    UniformPipelineSinglePhase,
    MinSize,
    MaxSize,
    MatchingSequence,
    Manual,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainPartition {
    pub ground: GroundSet,
    pub universe: Universe,
    pub chains: Vec<Chain>,
    pub provenance: Provenance,
}

impl ChainPartition {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Total number of elements over all chains.
    pub fn mass(&self) -> u64 {
        self.chains.iter().map(|c| c.len() as u64).sum()
    }

    /// Chain size histogram, ascending by size.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.chains {
            *h.entry(c.len()).or_insert(0) += 1;
        }
        h
    }

    pub fn min_chain_size(&self) -> usize {
        self.chains.iter().map(Chain::len).min().unwrap_or(0)
    }

    pub fn max_chain_size(&self) -> usize {
        self.chains.iter().map(Chain::len).max().unwrap_or(0)
    }

    /// Sort by size descending, then by the mask of the minimum element.
    pub fn canonicalize(&mut self) {
        self.chains.sort_by_key(|c| (std::cmp::Reverse(c.len()), c.bottom().mask()));
    }

    pub fn as_lists(&self) -> Vec<Vec<Subset>> {
        self.chains.iter().map(|c| c.elements().to_vec()).collect()
    }
}

/// The symmetric chain decomposition into classes of equal signature, one
/// chain per bottom element, ordered by the bottom's mask.
pub fn btk_scd(ground: GroundSet) -> ChainPartition {
    let n = ground.n();
    let mut chains = Vec::with_capacity(ground.width() as usize);
    for mask in 0..=ground.full_mask() {
        let m = match_linear(n, mask);
        if m.stars & mask == 0 {
            chains.push(chain_from_parts(ground, m.ones, m.stars));
        }
    }
    ChainPartition { ground, universe: Universe::Lattice, chains, provenance: Provenance::Btk }
}
