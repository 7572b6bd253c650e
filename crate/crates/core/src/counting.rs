//! Generating and counting symmetric chain decompositions.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::lattice::{binomial, binomial_big, colex_rank, GroundSet, Subset};
use crate::matching::BipartiteGraph;
use crate::partition::{
    mirror_closure, verify_partition, ChainPartition, Provenance, Requirements, Universe,
};
use crate::signature::circular_star_mask;
use crate::symposet::{level_graph, LevelGraph};

/// Largest saturated side accepted by the matching counter.
pub const MAX_SATURATED_SIDE: usize = 24;

/// Largest `n` for exact enumeration of symmetric chain decompositions.
pub const MAX_EXACT_SCD_N: u32 = 5;

/// `l(n)`: the number of chains with more than one element in a symmetric
/// chain decomposition of `2^[n-1]`.
pub fn kleitman_l(n: u32) -> u64 {
    if n < 2 {
        0
    } else {
        binomial(n - 1, (n - 2) / 2)
    }
}

/// One step of the doubling construction: from a symmetric chain
/// decomposition of `2^[n-1]`, sorted by nonincreasing chain size, and one
/// bit per chain with more than one element, build one of `2^[n]`.
///
/// For a chain `x_1 ⊂ ... ⊂ x_k` and the new element `n`:
/// bit `0` gives `x_1, ..., x_k, x_k+n` and `x_1+n, ..., x_{k-1}+n`;
/// bit `1` gives `x_1, x_1+n, ..., x_k+n` and `x_2, ..., x_k`.
/// A singleton `{x}` becomes `{x, x+n}`.
pub fn kleitman_extend(scd: &ChainPartition, bits: &str) -> Result<ChainPartition> {
    let old = scd.ground;
    if old.n() >= crate::lattice::MAX_N {
        return Err(Error::input("cannot extend beyond the largest ground set"));
    }
    if scd.universe != Universe::Lattice {
        return Err(Error::input("doubling needs a decomposition of the whole lattice"));
    }
    let req = Requirements {
        symmetric: true,
        count: Some(old.width() as usize),
        ..Requirements::default()
    };
    let verdict = verify_partition(scd, &req);
    if !verdict.ok {
        return Err(Error::input(format!(
            "seed is not a symmetric chain decomposition: {}",
            serde_json::to_string(&verdict.failures).expect("serializable")
        )));
    }
    if scd.chains.windows(2).any(|w| w[0].len() < w[1].len()) {
        return Err(Error::input("seed chains must be sorted by nonincreasing size"));
    }
    let l = scd.chains.iter().filter(|c| c.len() > 1).count();
    if bits.len() != l || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::input(format!(
            "expected a string of {l} binary digits, got {bits:?}"
        )));
    }
    let ground = GroundSet::new(old.n() + 1)?;
    let new_bit = 1u64 << old.n();
    let lift = |m: u64| ground.subset(m).expect("fits");
    let make = |masks: Vec<u64>| Chain::from_sorted_unchecked(ground, masks.into_iter().map(lift).collect());

    let mut chains = Vec::with_capacity(ground.width() as usize);
    let bits = bits.as_bytes();
    for (j, chain) in scd.chains.iter().enumerate() {
        let x: Vec<u64> = chain.elements().iter().map(|s| s.mask()).collect();
        let k = x.len();
        if k == 1 {
            chains.push(make(vec![x[0], x[0] | new_bit]));
            continue;
        }
        let (first, second) = if bits[j] == b'0' {
            let mut c1 = x.clone();
            c1.push(x[k - 1] | new_bit);
            let c2 = x[..k - 1].iter().map(|m| m | new_bit).collect();
            (c1, c2)
        } else {
            let mut c1 = vec![x[0]];
            c1.extend(x.iter().map(|m| m | new_bit));
            (c1, x[1..].to_vec())
        };
        chains.push(make(first));
        chains.push(make(second));
    }
    Ok(ChainPartition { ground, universe: Universe::Lattice, chains, provenance: Provenance::Kleitman })
}

/// All `2^l` doublings of `seed`, indexed by the bit string read as binary
/// with the first chain's bit most significant.
pub fn kleitman_all(seed: &ChainPartition) -> Result<Vec<ChainPartition>> {
    let l = seed.chains.iter().filter(|c| c.len() > 1).count();
    if l > 20 {
        return Err(Error::resource("enumerating all doublings", format!("2^{l} partitions")));
    }
    (0..1u64 << l)
        .map(|code| {
            let bits: String =
                (0..l).map(|j| if code >> (l - 1 - j) & 1 == 1 { '1' } else { '0' }).collect();
            kleitman_extend(seed, &bits)
        })
        .collect()
}

/// Complete matchings `T_M, ..., T_{n-1}` where `T_i` sends every element of
/// rank `i + 1` to one of its down-covers in `(Q, <)`, injectively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingSequence {
    ground: GroundSet,
    /// `matchings[i - M][u]` is the colex index of the rank-`i` mate of the
    /// `u`-th element of rank `i + 1`.
    matchings: Vec<Vec<u32>>,
}

impl MatchingSequence {
    pub fn new(ground: GroundSet, matchings: Vec<Vec<u32>>) -> Result<Self> {
        let n = ground.n();
        let m = ground.q_bottom_rank();
        if matchings.len() != (n - m) as usize {
            return Err(Error::input(format!(
                "expected {} matchings for n = {n}, got {}",
                n - m,
                matchings.len()
            )));
        }
        for (t, matching) in matchings.iter().enumerate() {
            let i = m + t as u32;
            let upper: Vec<Subset> = ground.level(i + 1).collect();
            let lower_size = binomial(n, i) as usize;
            if matching.len() != upper.len() {
                return Err(Error::input(format!(
                    "matching into rank {i} must saturate all {} elements of rank {}",
                    upper.len(),
                    i + 1
                )));
            }
            let mut used = vec![false; lower_size];
            for (u, &v) in matching.iter().enumerate() {
                let v = v as usize;
                if v >= lower_size || used[v] {
                    return Err(Error::input(format!("matching into rank {i} is not injective")));
                }
                used[v] = true;
                let x = upper[u].mask();
                let removed = x & !nth_of_level(n, i, v);
                let is_cover = removed.count_ones() == 1
                    && nth_of_level(n, i, v) & !x == 0
                    && removed & circular_star_mask(n, x) != 0;
                if !is_cover {
                    return Err(Error::input(format!(
                        "{} -> element {v} of rank {i} is not a cover edge",
                        upper[u]
                    )));
                }
            }
        }
        Ok(MatchingSequence { ground, matchings })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn matchings(&self) -> &[Vec<u32>] {
        &self.matchings
    }
}

fn nth_of_level(n: u32, k: u32, index: usize) -> u64 {
    // colex unranking
    let mut mask = 0u64;
    let mut rest = index as u64;
    for t in (1..=k).rev() {
        let mut p = t - 1;
        while p + 1 < n && binomial(p + 1, t) <= rest {
            p += 1;
        }
        mask |= 1 << p;
        rest -= binomial(p, t);
    }
    mask
}

/// Read off the skipless chains of `Q` formed by a matching sequence and
/// close each under the mirror map.
pub fn matchings_to_scd(seq: &MatchingSequence) -> ChainPartition {
    let ground = seq.ground;
    let n = ground.n();
    let m = ground.q_bottom_rank();
    // successor of each element, level by level
    let succ: Vec<Vec<Option<u32>>> = seq
        .matchings
        .iter()
        .enumerate()
        .map(|(t, matching)| {
            let mut up = vec![None; binomial(n, m + t as u32) as usize];
            for (u, &v) in matching.iter().enumerate() {
                up[v as usize] = Some(u as u32);
            }
            up
        })
        .collect();
    let levels: Vec<Vec<Subset>> = (m..=n).map(|k| ground.level(k).collect()).collect();
    let chains = levels[0]
        .iter()
        .enumerate()
        .map(|(start, &x)| {
            let mut elements = vec![x];
            let mut cur = start;
            for (t, up) in succ.iter().enumerate() {
                match up[cur] {
                    Some(next) => {
                        cur = next as usize;
                        elements.push(levels[t + 1][cur]);
                    }
                    None => break,
                }
            }
            mirror_closure(&Chain::from_sorted_unchecked(ground, elements))
        })
        .collect();
    ChainPartition {
        ground,
        universe: Universe::Lattice,
        chains,
        provenance: Provenance::MatchingSequence,
    }
}

/// Every complete matching of a level graph saturating its upper level,
/// each as `mate[u]` = lower index. Fails once more than `limit` exist.
pub fn enumerate_complete_matchings(g: &LevelGraph, limit: usize) -> Result<Vec<Vec<u32>>> {
    let mut down = vec![Vec::new(); g.upper().len()];
    for e in g.edges() {
        down[e.upper as usize].push(e.lower);
    }
    let mut out = Vec::new();
    let mut mate = vec![0u32; down.len()];
    let mut used = vec![false; g.lower().len()];
    fn go(
        u: usize,
        down: &[Vec<u32>],
        mate: &mut [u32],
        used: &mut [bool],
        out: &mut Vec<Vec<u32>>,
        limit: usize,
    ) -> bool {
        if u == down.len() {
            out.push(mate.to_vec());
            return out.len() <= limit;
        }
        for &v in &down[u] {
            if !used[v as usize] {
                used[v as usize] = true;
                mate[u] = v;
                let keep_going = go(u + 1, down, mate, used, out, limit);
                used[v as usize] = false;
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }
    if !go(0, &down, &mut mate, &mut used, &mut out, limit) {
        return Err(Error::resource("enumerating complete matchings", format!("more than {limit}")));
    }
    Ok(out)
}

/// Every matching sequence of `(Q, <)` for ground set `ground`.
pub fn all_matching_sequences(ground: GroundSet, limit: usize) -> Result<Vec<MatchingSequence>> {
    let n = ground.n();
    let m = ground.q_bottom_rank();
    let mut per_level = Vec::new();
    for i in m..n {
        per_level.push(enumerate_complete_matchings(&level_graph(ground, i + 1)?, limit)?);
    }
    let total: u128 = per_level.iter().map(|v| v.len() as u128).product();
    if total > limit as u128 {
        return Err(Error::resource("enumerating matching sequences", total.to_string()));
    }
    let mut out = vec![Vec::new()];
    for options in &per_level {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for choice in options {
                let mut seq: Vec<Vec<u32>> = prefix.clone();
                seq.push(choice.clone());
                next.push(seq);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(|matchings| MatchingSequence { ground, matchings }).collect())
}

/// Which level of a level graph must be saturated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelSide {
    Upper,
    Lower,
}

/// Number of matchings of a level graph saturating `side`.
pub fn count_complete_matchings(g: &LevelGraph, side: LevelSide) -> Result<BigUint> {
    let bip = g.to_bipartite();
    match side {
        LevelSide::Lower => count_saturating_matchings(&bip),
        LevelSide::Upper => count_saturating_matchings(&bip.transpose()),
    }
}

/// Number of matchings of `g` that saturate side `A`, by inclusion-exclusion
/// over `X ⊆ A`: `sum_X (-1)^{|A|-|X|} e_{|A|}(d_X(b) : b in B)` where
/// `d_X(b)` counts the neighbours of `b` in `X`. For `|A| = |B|` this is
/// Ryser's formula for the permanent.
pub fn count_saturating_matchings(g: &BipartiteGraph) -> Result<BigUint> {
    let s = g.a;
    if s > MAX_SATURATED_SIDE {
        return Err(Error::resource(
            "counting complete matchings",
            format!("2^{s} * {} * {s} operations", g.b),
        ));
    }
    if s == 0 {
        return Ok(BigUint::one());
    }
    if s > g.b {
        return Ok(BigUint::zero());
    }
    let adj = g.adjacency_a();
    let total = match sweep::<i128>(&adj, g.b) {
        Some(v) => v,
        None => sweep::<BigInt>(&adj, g.b).expect("big integers do not overflow"),
    };
    if total.is_negative() {
        return Err(Error::Construction(format!("negative matching count {total}")));
    }
    Ok(total.to_biguint().expect("nonnegative"))
}

trait Acc: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    /// `self + a * d`, or `None` on overflow.
    fn add_mul(&self, a: &Self, d: u32) -> Option<Self>;
    fn add(&self, other: &Self, negate: bool) -> Option<Self>;
}

impl Acc for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add_mul(&self, a: &Self, d: u32) -> Option<Self> {
        a.checked_mul(d as i128)?.checked_add(*self)
    }
    fn add(&self, other: &Self, negate: bool) -> Option<Self> {
        if negate {
            self.checked_sub(*other)
        } else {
            self.checked_add(*other)
        }
    }
}

impl Acc for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add_mul(&self, a: &Self, d: u32) -> Option<Self> {
        Some(self + a * d)
    }
    fn add(&self, other: &Self, negate: bool) -> Option<Self> {
        Some(if negate { self - other } else { self + other })
    }
}

fn sweep<T: Acc>(adj: &[Vec<u32>], b: usize) -> Option<BigInt>
where
    BigInt: From<T>,
{
    let s = adj.len();
    let mut d = vec![0u32; b];
    let mut e: Vec<T> = vec![T::zero(); s + 1];
    let mut total = T::zero();
    let mut current = 0u64;
    let mut size = 0usize;
    for step in 1..1u64 << s {
        let flip = step.trailing_zeros() as usize;
        current ^= 1 << flip;
        let added = current >> flip & 1 == 1;
        for &v in &adj[flip] {
            if added {
                d[v as usize] += 1;
            } else {
                d[v as usize] -= 1;
            }
        }
        size = if added { size + 1 } else { size - 1 };
        // elementary symmetric polynomial e_s of the d values
        e.iter_mut().for_each(|x| *x = T::zero());
        e[0] = T::one();
        let mut seen = 0usize;
        for &dv in d.iter().filter(|&&dv| dv > 0) {
            seen += 1;
            for j in (1..=seen.min(s)).rev() {
                e[j] = e[j].add_mul(&e[j - 1], dv)?;
            }
        }
        if seen >= s {
            total = total.add(&e[s], (s - size) % 2 == 1)?;
        }
    }
    Some(BigInt::from(total))
}

/// `sqrt(binom(b, a))`, the least number of complete matchings from a side of
/// size `a` into a side of size `b` in a normalized matching graph.
pub fn matching_lower_bound(size_a: u64, size_b: u64) -> Result<f64> {
    if size_a > size_b {
        return Err(Error::input(format!("need |A| <= |B|, got {size_a} > {size_b}")));
    }
    let c = binomial_big(size_b, size_a);
    Ok(big_log2(&c).map_or(0.0, |l| (l / 2.0).exp2()))
}

/// Exact check of `count >= sqrt(binom(b, a))`, i.e. `count^2 >= binom(b, a)`.
pub fn meets_matching_bound(count: &BigUint, size_a: u64, size_b: u64) -> bool {
    count * count >= binomial_big(size_b, size_a)
}

/// `log2(x)` for a positive big integer, `None` for zero.
fn big_log2(x: &BigUint) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return Some(x.to_f64().expect("finite").log2());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    Some(top.log2() + shift as f64)
}

/// Number of symmetric chain decompositions of `2^[n]`, for `n <= 5`.
///
/// Levels are processed upward. Each element carries the rank at which its
/// chain must end (`n` minus the rank where it began); a level-to-level
/// step extends every unfinished chain to a distinct covering set, and the
/// uncovered sets of the next level start new chains, which is only allowed
/// below the middle. Counts are memoized on the per-level end ranks.
pub fn count_scds_exact(ground: GroundSet) -> Result<BigUint> {
    let n = ground.n();
    if n > MAX_EXACT_SCD_N {
        return Err(Error::resource(
            "exact symmetric chain decomposition count",
            format!("n = {n} exceeds {MAX_EXACT_SCD_N}"),
        ));
    }
    let levels: Vec<Vec<u64>> = (0..=n).map(|k| ground.level(k).map(|s| s.mask()).collect()).collect();
    let ups: Vec<Vec<Vec<u32>>> = (0..n)
        .map(|k| {
            levels[k as usize]
                .iter()
                .map(|&x| {
                    (0..n)
                        .filter(|&i| x >> i & 1 == 0)
                        .map(|i| colex_rank(x | 1 << i) as u32)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut memo = HashMap::new();
    Ok(count_from(n, 0, vec![n as u8], &ups, &mut memo))
}

fn count_from(
    n: u32,
    k: u32,
    ends: Vec<u8>,
    ups: &[Vec<Vec<u32>>],
    memo: &mut HashMap<(u32, Vec<u8>), BigUint>,
) -> BigUint {
    if k == n {
        return BigUint::one();
    }
    if let Some(v) = memo.get(&(k, ends.clone())) {
        return v.clone();
    }
    let movers: Vec<usize> = (0..ends.len()).filter(|&i| ends[i] as u32 > k).collect();
    let next_size = binomial(n, k + 1) as usize;
    let born = (n - k - 1) as u8;
    let may_start = n - k > k + 1;
    let mut next = vec![u8::MAX; next_size];
    let mut total = BigUint::zero();
    #[allow(clippy::too_many_arguments)]
    fn assign(
        i: usize,
        movers: &[usize],
        ends: &[u8],
        up: &[Vec<u32>],
        next: &mut Vec<u8>,
        born: u8,
        may_start: bool,
        recurse: &mut dyn FnMut(Vec<u8>),
    ) {
        if i == movers.len() {
            let free = next.iter().filter(|&&e| e == u8::MAX).count();
            if free > 0 && !may_start {
                return;
            }
            let state = next.iter().map(|&e| if e == u8::MAX { born } else { e }).collect();
            recurse(state);
            return;
        }
        let x = movers[i];
        for &y in &up[x] {
            if next[y as usize] == u8::MAX {
                next[y as usize] = ends[x];
                assign(i + 1, movers, ends, up, next, born, may_start, recurse);
                next[y as usize] = u8::MAX;
            }
        }
    }
    let up = &ups[k as usize];
    let mut recurse = |state: Vec<u8>| {
        total += count_from(n, k + 1, state, ups, memo);
    };
    assign(0, &movers, &ends, up, &mut next, born, may_start, &mut recurse);
    memo.insert((k, ends), total.clone());
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub n: u32,
    /// Number of doubling bits; the doubling construction yields `2^l` decompositions.
    pub l: u64,
    pub kleitman_log2: f64,
    /// `log2` of the product over `k = ceil(n/2)..n-1` of
    /// `max(1, ceil(sqrt(binom(a_k, a_{k+1}))))`, `a_k = binom(n, k)`.
    pub product_bound_log2: f64,
    /// Whether the product bound was evaluated with exact integers.
    pub product_bound_exact: bool,
    /// `log2(n^(2^n))`.
    pub upper_bound_log2: f64,
    pub lower_le_upper: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

/// Level sizes up to which the product bound is computed with big integers.
const EXACT_PRODUCT_LIMIT: u64 = 4096;

pub fn scd_bounds_report(ground: GroundSet) -> BoundsReport {
    let n = ground.n();
    let l = kleitman_l(n);
    let m = ground.q_bottom_rank();
    let mut exact = true;
    let mut product_log2 = 0.0f64;
    for k in m..n {
        let (a, b) = (binomial(n, k), binomial(n, k + 1));
        if a <= EXACT_PRODUCT_LIMIT {
            let c = binomial_big(a, b);
            let mut root = c.sqrt();
            if &root * &root < c {
                root += 1u32;
            }
            product_log2 += big_log2(&root).unwrap_or(0.0).max(0.0);
        } else {
            exact = false;
            let ln = statrs::function::gamma::ln_gamma(a as f64 + 1.0)
                - statrs::function::gamma::ln_gamma(b as f64 + 1.0)
                - statrs::function::gamma::ln_gamma((a - b) as f64 + 1.0);
            product_log2 += (ln / 2.0 / std::f64::consts::LN_2).max(0.0);
        }
    }
    let upper = (1u64 << n.min(63)) as f64 * (n as f64).log2();
    let lower = product_log2.max(l as f64);
    BoundsReport {
        n,
        l,
        kleitman_log2: l as f64,
        product_bound_log2: product_log2,
        product_bound_exact: exact,
        upper_bound_log2: upper,
        lower_le_upper: lower <= upper,
        exact: None,
    }
}
