use serde::Serialize;

use super::alpha::{alpha_constant, k_for_epsilon, AlphaInterval};
use super::schedule::{f_schedule, FSchedule};
use super::{ChainPartition, Provenance, Universe};
use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::lattice::{binomial, colex_rank, GroundSet, Subset};
use crate::matching::HopcroftKarp;
use crate::signature::mirror_mask;
use crate::symposet::less_masks;

/// Levels `lo..=hi` of `Q` with per-level mask lists and mirrors.
struct QLevels {
    ground: GroundSet,
    lo: u32,
    hi: u32,
    masks: Vec<Vec<u64>>,
    mirrors: Vec<Vec<u64>>,
}

impl QLevels {
    fn new(ground: GroundSet, lo: u32, hi: u32) -> Result<QLevels> {
        let n = ground.n();
        if lo < ground.q_bottom_rank() || lo > hi || hi > n {
            return Err(Error::input(format!(
                "levels {lo}..={hi} are not a nonempty range inside Q for n = {n}"
            )));
        }
        let masks: Vec<Vec<u64>> =
            (lo..=hi).map(|k| ground.level(k).map(|s| s.mask()).collect()).collect();
        let mirrors = masks
            .iter()
            .map(|level| level.iter().map(|&m| mirror_mask(n, m)).collect())
            .collect();
        Ok(QLevels { ground, lo, hi, masks, mirrors })
    }

    fn level(&self, k: u32) -> &[u64] {
        &self.masks[(k - self.lo) as usize]
    }

    fn sizes(&self) -> Vec<u64> {
        self.masks.iter().map(|l| l.len() as u64).collect()
    }

    fn mirror(&self, mask: u64) -> u64 {
        let k = mask.count_ones();
        self.mirrors[(k - self.lo) as usize][colex_rank(mask) as usize]
    }

    /// Elements `x` of rank `|y| + gap` with `y < x`, ascending by mask.
    fn above(&self, y: u64, gap: u32, out: &mut Vec<u64>) {
        out.clear();
        let free: Vec<u32> = (0..self.ground.n()).filter(|&i| y >> i & 1 == 0).collect();
        let c = free.len() as u32;
        if gap == 0 || gap > c {
            return;
        }
        let py = self.mirror(y);
        let mut pick = (1u64 << gap) - 1;
        loop {
            let mut x = y;
            let mut rest = pick;
            while rest != 0 {
                x |= 1 << free[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            if less_masks(y, py, x, self.mirror(x)) {
                out.push(x);
            }
            match crate::lattice::next_same_weight(pick, c) {
                Some(next) => pick = next,
                None => break,
            }
        }
    }

    fn subset(&self, mask: u64) -> Subset {
        self.ground.subset(mask).expect("mask within ground set")
    }
}

/// Chains under construction, stored as mask lists ascending by rank.
type Chains = Vec<Vec<u64>>;

/// Extend `chains` by the elements of ranks `block_lo..=block_hi` so that
/// every block element joins some chain. With `heads_required`, every chain
/// must also receive at least one block element.
fn extend_block(
    idx: &QLevels,
    chains: &mut Chains,
    block_lo: u32,
    block_hi: u32,
    heads_required: bool,
) -> Result<()> {
    let mut offset = Vec::new();
    let mut total = 0usize;
    for k in block_lo..=block_hi {
        offset.push(total);
        total += idx.level(k).len();
    }
    let id_of = |x: u64| -> usize {
        offset[(x.count_ones() - block_lo) as usize] + colex_rank(x) as usize
    };
    let mask_of: Vec<u64> = (block_lo..=block_hi).flat_map(|k| idx.level(k).iter().copied()).collect();
    let non_top = total - idx.level(block_hi).len();
    let heads = chains.len();

    let mut adj: Vec<Vec<u32>> = Vec::with_capacity(heads + non_top);
    let mut buf = Vec::new();
    let mut push_edges = |from: u64, adj: &mut Vec<Vec<u32>>| {
        let r = from.count_ones();
        let mut list = Vec::new();
        for target in block_lo.max(r + 1)..=block_hi {
            idx.above(from, target - r, &mut buf);
            list.extend(buf.iter().map(|&x| id_of(x) as u32));
        }
        adj.push(list);
    };
    for chain in chains.iter() {
        push_edges(*chain.last().expect("nonempty chain"), &mut adj);
    }
    for &x in &mask_of[..non_top] {
        push_edges(x, &mut adj);
    }

    let mut hk = HopcroftKarp::new(&adj, total);
    if heads_required {
        for h in 0..heads {
            hk.activate(h);
        }
        let matched = hk.run();
        if matched < heads {
            return Err(Error::Construction(format!(
                "ranks {block_lo}..={block_hi}: only {matched} of {heads} chains can be extended"
            )));
        }
    }
    hk.activate_all();
    let size = hk.run();
    let covered = (0..total).filter(|&v| hk.mate_of_right(v).is_some()).count();
    if covered < total {
        return Err(Error::Construction(format!(
            "ranks {block_lo}..={block_hi}: matching of size {size} leaves {} of {total} elements without a predecessor",
            total - covered
        )));
    }

    let mut placed = 0usize;
    for (h, chain) in chains.iter_mut().enumerate() {
        let mut cur = hk.mate_of_left(h);
        while let Some(v) = cur {
            chain.push(mask_of[v]);
            placed += 1;
            cur = if v < non_top { hk.mate_of_left(heads + v) } else { None };
        }
    }
    if placed != total {
        return Err(Error::Construction(format!(
            "ranks {block_lo}..={block_hi}: {placed} of {total} elements reachable from chain heads"
        )));
    }
    Ok(())
}

fn into_partition(idx: &QLevels, chains: Chains, provenance: Provenance) -> ChainPartition {
    let ground = idx.ground;
    let chains = chains
        .into_iter()
        .map(|c| Chain::from_sorted_unchecked(ground, c.into_iter().map(|m| idx.subset(m)).collect()))
        .collect();
    ChainPartition {
        ground,
        universe: Universe::QLevels { lo: idx.lo, hi: idx.hi },
        chains,
        provenance,
    }
}

fn min_size_chains(idx: &QLevels) -> Result<(Chains, FSchedule)> {
    let schedule = f_schedule(&idx.sizes())?;
    let mut chains: Chains = idx.level(idx.lo).iter().map(|&m| vec![m]).collect();
    let mut prev = 0usize;
    for &end in &schedule.iterates[1..] {
        extend_block(idx, &mut chains, idx.lo + prev as u32 + 1, idx.lo + end as u32, true)?;
        prev = end;
    }
    let top = (idx.hi - idx.lo) as usize;
    if prev < top {
        extend_block(idx, &mut chains, idx.lo + prev as u32 + 1, idx.hi, false)?;
    }
    Ok((chains, schedule))
}

/// Partition ranks `lo..=hi` of `(Q, <)` into `|[n]^(lo)|` chains of size at
/// least `d + 1`, `d` being the depth of the level-size schedule. Chains are
/// listed in the order of their bottom elements.
pub fn partition_min_size(ground: GroundSet, lo: u32, hi: u32) -> Result<(ChainPartition, FSchedule)> {
    let idx = QLevels::new(ground, lo, hi)?;
    let (chains, schedule) = min_size_chains(&idx)?;
    Ok((into_partition(&idx, chains, Provenance::MinSize), schedule))
}

/// Largest chain length allowed by `|C| * w <= 2|P| + 5w`.
fn max_size_bound(idx: &QLevels) -> usize {
    let w = idx.level(idx.lo).len() as u64;
    let total: u64 = idx.sizes().iter().sum();
    ((2 * total + 5 * w) / w) as usize
}

fn max_size_chains(idx: &QLevels) -> Result<Chains> {
    let bound = max_size_bound(idx);
    let mut chains: Chains = idx.level(idx.lo).iter().map(|&m| vec![m]).collect();
    let mut buf = Vec::new();
    for k in idx.lo + 1..=idx.hi {
        let level = idx.level(k);
        let adj: Vec<Vec<u32>> = chains
            .iter()
            .map(|c| {
                if c.len() >= bound {
                    return Vec::new();
                }
                let head = *c.last().expect("nonempty chain");
                idx.above(head, k - head.count_ones(), &mut buf);
                buf.iter().map(|&x| colex_rank(x) as u32).collect()
            })
            .collect();
        let mut order: Vec<usize> = (0..chains.len()).filter(|&c| chains[c].len() < bound).collect();
        order.sort_by_key(|&c| chains[c].len());
        let mut hk = HopcroftKarp::new(&adj, level.len());
        let mut i = 0;
        while i < order.len() {
            let len = chains[order[i]].len();
            while i < order.len() && chains[order[i]].len() == len {
                hk.activate(order[i]);
                i += 1;
            }
            hk.run();
        }
        let size = hk.size();
        if size < level.len() {
            return Err(Error::Construction(format!(
                "rank {k}: only {size} of {} elements attach to a chain shorter than {bound}",
                level.len()
            )));
        }
        for (c, chain) in chains.iter_mut().enumerate() {
            if let Some(v) = hk.mate_of_left(c) {
                chain.push(level[v]);
            }
        }
    }
    Ok(chains)
}

/// Partition ranks `lo..=hi` of `(Q, <)` into `|[n]^(lo)|` chains, each of
/// size at most `2|P|/w + 5`.
pub fn partition_max_size(ground: GroundSet, lo: u32, hi: u32) -> Result<ChainPartition> {
    let idx = QLevels::new(ground, lo, hi)?;
    let chains = max_size_chains(&idx)?;
    Ok(into_partition(&idx, chains, Provenance::MaxSize))
}

/// `C ∪ p(C)` for a chain `C` of `(Q, <)`.
pub fn mirror_closure(chain: &Chain) -> Chain {
    let ground = chain.ground();
    let n = ground.n();
    let mut masks: Vec<u64> = chain.elements().iter().map(|s| s.mask()).collect();
    masks.extend(chain.elements().iter().map(|s| mirror_mask(n, s.mask())));
    masks.sort_by_key(|&m| (m.count_ones(), m));
    masks.dedup();
    Chain::from_sorted_unchecked(
        ground,
        masks.into_iter().map(|m| ground.subset(m).expect("within ground")).collect(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformReport {
    pub n: u32,
    pub epsilon: f64,
    pub alpha: AlphaInterval,
    /// The `K` chosen from `epsilon`.
    pub k: u64,
    /// Offset above `ceil(n/2)` where the second phase starts.
    pub split_offset: u32,
    pub single_phase: bool,
    /// Depth of the level-size schedule of the first phase.
    pub depth: usize,
    pub phase_one_ranks: (u32, u32),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_two_ranks: Option<(u32, u32)>,
    pub phase_one_min: usize,
    pub phase_one_max: usize,
    pub chains: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// `(alpha - epsilon) sqrt(n)`.
    pub lower_target: f64,
    /// `(sqrt(ln K / 2) + K sqrt(pi / 2)) sqrt(n)`.
    pub upper_target: f64,
    /// `0.8 sqrt(n)` and `13 sqrt(n)`, reported only.
    pub asymptotic_window: (f64, f64),
}

/// Smallest `T > 0` with `binom(n, ceil(n/2) + T) < w / k`.
fn split_offset(ground: GroundSet, k: u64) -> u32 {
    let n = ground.n();
    let m = ground.q_bottom_rank();
    let w = ground.width() as u128;
    (1..).find(|&t| (binomial(n, m + t) as u128) * (k as u128) < w).expect("eventually zero")
}

/// Rank-symmetric chain partition of `2^[n]` into `binom(n, floor(n/2))`
/// chains: a min-size partition of the lower part of `Q`, a max-size
/// partition of the upper part, glued at their shared level and closed
/// under the mirror map.
pub fn uniform_rank_symmetric_partition(
    ground: GroundSet,
    epsilon: f64,
) -> Result<(ChainPartition, UniformReport)> {
    let n = ground.n();
    if n < 2 {
        return Err(Error::input("the uniform partition needs n >= 2"));
    }
    let k = k_for_epsilon(epsilon)?;
    let alpha = alpha_constant(epsilon / 64.0)?;
    let t = split_offset(ground, k);
    let m = ground.q_bottom_rank();
    let top_offset = n / 2;
    let single_phase = t >= top_offset;

    let (chains, schedule, phase_one_hi, phase_two) = if single_phase {
        let idx = QLevels::new(ground, m, n)?;
        let (chains, schedule) = min_size_chains(&idx)?;
        (chains, schedule, n, None)
    } else {
        let split = m + t;
        let lower = QLevels::new(ground, m, split)?;
        let (mut chains, schedule) = min_size_chains(&lower)?;
        let upper = QLevels::new(ground, split, n)?;
        let tails = max_size_chains(&upper)?;
        for chain in &mut chains {
            let top = *chain.last().expect("nonempty chain");
            if top.count_ones() == split {
                let tail = &tails[colex_rank(top) as usize];
                debug_assert_eq!(tail[0], top);
                chain.extend_from_slice(&tail[1..]);
            }
        }
        (chains, schedule, split, Some((split, n)))
    };

    let phase_one_min = chains
        .iter()
        .map(|c| c.iter().filter(|m| m.count_ones() <= phase_one_hi).count())
        .min()
        .unwrap_or(0);
    let phase_one_max = chains
        .iter()
        .map(|c| c.iter().filter(|m| m.count_ones() <= phase_one_hi).count())
        .max()
        .unwrap_or(0);
    if phase_one_min < schedule.depth + 1 {
        return Err(Error::Construction(format!(
            "first phase produced a chain of size {phase_one_min} < d + 1 = {}",
            schedule.depth + 1
        )));
    }

    let q_chains: Vec<Chain> = chains
        .into_iter()
        .map(|c| {
            Chain::from_sorted_unchecked(ground, c.into_iter().map(|m| ground.subset(m).unwrap()).collect())
        })
        .collect();
    let full: Vec<Chain> = q_chains.iter().map(mirror_closure).collect();
    let provenance = if single_phase {
        Provenance::UniformPipelineSinglePhase
    } else {
        Provenance::UniformPipeline
    };
    let partition = ChainPartition { ground, universe: Universe::Lattice, chains: full, provenance };

    let sqrt_n = (n as f64).sqrt();
    let kf = k as f64;
    let report = UniformReport {
        n,
        epsilon,
        alpha,
        k,
        split_offset: t,
        single_phase,
        depth: schedule.depth,
        phase_one_ranks: (m, phase_one_hi),
        phase_two_ranks: phase_two,
        phase_one_min,
        phase_one_max,
        chains: partition.len(),
        min_size: partition.min_chain_size(),
        max_size: partition.max_chain_size(),
        lower_target: (alpha.midpoint() - epsilon) * sqrt_n,
        upper_target: ((kf.ln() / 2.0).sqrt() + kf * (std::f64::consts::PI / 2.0).sqrt()) * sqrt_n,
        asymptotic_window: (0.8 * sqrt_n, 13.0 * sqrt_n),
    };
    Ok((partition, report))
}
