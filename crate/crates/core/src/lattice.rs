//! Ground-set arithmetic on the Boolean lattice `2^[n]`.
//!
//! Subsets of `[n] = {1, ..., n}` are stored as single-word bitmasks where
//! bit `i - 1` records membership of element `i`. Elements are 1-indexed at
//! every public boundary; the mask is an internal detail.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set supported by the single-word mask representation.
pub const MAX_N: u32 = 64;

/// The ground set `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct GroundSet {
    n: u32,
}

impl GroundSet {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::input(format!(
                "ground set size must lie in 1..={MAX_N}, got {n}"
            )));
        }
        Ok(GroundSet { n })
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    /// Mask with the low `n` bits set.
    #[inline]
    pub fn full_mask(self) -> u64 {
        low_bits(self.n)
    }

    pub fn empty(self) -> Subset {
        Subset { ground: self, mask: 0 }
    }

    pub fn full(self) -> Subset {
        Subset { ground: self, mask: self.full_mask() }
    }

    pub fn subset(self, mask: u64) -> Result<Subset> {
        if mask & !self.full_mask() != 0 {
            return Err(Error::input(format!(
                "mask {mask:#x} has bits above position {}",
                self.n - 1
            )));
        }
        Ok(Subset { ground: self, mask })
    }

    pub fn from_elements<I: IntoIterator<Item = u32>>(self, elements: I) -> Result<Subset> {
        let mut mask = 0u64;
        for e in elements {
            self.check_element(e)?;
            mask |= 1 << (e - 1);
        }
        Ok(Subset { ground: self, mask })
    }

    pub fn check_element(self, e: u32) -> Result<()> {
        if e == 0 || e > self.n {
            Err(Error::input(format!("element {e} is outside [1, {}]", self.n)))
        } else {
            Ok(())
        }
    }

    /// `true` when rank `k` belongs to the upper half `Q = [n]^(>= n/2)`.
    #[inline]
    pub fn rank_in_q(self, k: u32) -> bool {
        2 * k >= self.n
    }

    /// Lowest rank of `Q`, i.e. `ceil(n/2)`.
    #[inline]
    pub fn q_bottom_rank(self) -> u32 {
        self.n.div_ceil(2)
    }

    /// Width of `2^[n]`: `binom(n, floor(n/2))`.
    pub fn width(self) -> u64 {
        binomial(self.n, self.n / 2)
    }

    /// All subsets of rank `k` in ascending mask order.
    pub fn level(self, k: u32) -> Level {
        Level::new(self.n, k)
    }

    /// Every subset of `[n]` in ascending mask order. Only sensible for small `n`.
    pub fn all_subsets(self) -> impl Iterator<Item = Subset> {
        let ground = self;
        let last = self.full_mask();
        (0..=last).map(move |mask| Subset { ground, mask })
    }

    pub fn interval(self, i: u32, j: u32) -> Result<CircularInterval> {
        interval_mod(self, i, j)
    }
}

impl TryFrom<u32> for GroundSet {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        GroundSet::new(n)
    }
}

impl From<GroundSet> for u32 {
    fn from(g: GroundSet) -> u32 {
        g.n
    }
}

#[inline]
pub(crate) fn low_bits(count: u32) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

/// Mask of the linear interval `[i, j]`, `1 <= i <= j <= 64`.
#[inline]
pub(crate) fn range_mask(i: u32, j: u32) -> u64 {
    low_bits(j) & !low_bits(i - 1)
}

/// Text syntax for subsets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetFormat {
    /// `{}` or `{e1,e2,...}` with ascending elements.
    #[default]
    Set,
    /// Length-`n` string of `0`/`1`, character `i` is membership of element `i`.
    Bits,
}

/// A subset of `[n]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    ground: GroundSet,
    mask: u64,
}

impl Subset {
    #[inline]
    pub fn ground(self) -> GroundSet {
        self.ground
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.ground.n
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn rank(self) -> u32 {
        self.mask.count_ones()
    }

    #[inline]
    pub fn contains(self, e: u32) -> bool {
        e >= 1 && e <= self.ground.n && self.mask >> (e - 1) & 1 == 1
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn complement(self) -> Subset {
        Subset { ground: self.ground, mask: !self.mask & self.ground.full_mask() }
    }

    pub fn with(self, e: u32) -> Subset {
        debug_assert!(e >= 1 && e <= self.ground.n);
        Subset { ground: self.ground, mask: self.mask | 1 << (e - 1) }
    }

    pub fn without(self, e: u32) -> Subset {
        debug_assert!(e >= 1 && e <= self.ground.n);
        Subset { ground: self.ground, mask: self.mask & !(1 << (e - 1)) }
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset { ground: self.ground, mask: self.mask | other.mask }
    }

    /// `true` when `|x| >= n/2`.
    #[inline]
    pub fn in_q(self) -> bool {
        self.ground.rank_in_q(self.rank())
    }

    /// Elements in ascending order, 1-indexed.
    pub fn elements(self) -> Elements {
        Elements { rest: self.mask }
    }

    /// Same mask, viewed inside a larger ground set.
    pub fn lift(self, ground: GroundSet) -> Result<Subset> {
        ground.subset(self.mask)
    }

    pub fn to_bits(self) -> String {
        (1..=self.ground.n)
            .map(|e| if self.contains(e) { '1' } else { '0' })
            .collect()
    }

    pub fn render(self, format: SubsetFormat) -> String {
        match format {
            SubsetFormat::Set => self.to_string(),
            SubsetFormat::Bits => self.to_bits(),
        }
    }

    pub fn parse(ground: GroundSet, text: &str, format: SubsetFormat) -> Result<Subset> {
        match format {
            SubsetFormat::Set => parse_set(ground, text),
            SubsetFormat::Bits => parse_bits(ground, text),
        }
    }

    /// Parse either syntax, choosing by the leading character.
    pub fn parse_any(ground: GroundSet, text: &str) -> Result<Subset> {
        if text.trim_start().starts_with('{') {
            parse_set(ground, text)
        } else {
            parse_bits(ground, text)
        }
    }
}

fn parse_set(ground: GroundSet, text: &str) -> Result<Subset> {
    let body = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::input(format!("subset {text:?} must be written as {{e1,e2,...}}")))?;
    let body = body.trim();
    if body.is_empty() {
        return Ok(ground.empty());
    }
    let mut mask = 0u64;
    let mut last = 0u32;
    for part in body.split(',') {
        let e: u32 = part
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad element {part:?} in {text:?}")))?;
        ground.check_element(e)?;
        if e <= last {
            return Err(Error::input(format!(
                "elements of {text:?} must be strictly ascending"
            )));
        }
        last = e;
        mask |= 1 << (e - 1);
    }
    Ok(Subset { ground, mask })
}

fn parse_bits(ground: GroundSet, text: &str) -> Result<Subset> {
    let text = text.trim();
    if text.len() != ground.n as usize {
        return Err(Error::input(format!(
            "bit string {text:?} has length {}, expected {}",
            text.len(),
            ground.n
        )));
    }
    let mut mask = 0u64;
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => mask |= 1 << i,
            _ => return Err(Error::input(format!("bad character {c:?} in bit string"))),
        }
    }
    Ok(Subset { ground, mask })
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (idx, e) in self.elements().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊂[{}]", self, self.ground.n)
    }
}

/// Iterator over the elements of a subset.
pub struct Elements {
    rest: u64,
}

impl Iterator for Elements {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.rest == 0 {
            return None;
        }
        let tz = self.rest.trailing_zeros();
        self.rest &= self.rest - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.rest.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

/// All `k`-subsets of `[n]` in ascending mask order (Gosper's hack).
pub struct Level {
    ground: GroundSet,
    next: Option<u64>,
}

impl Level {
    fn new(n: u32, k: u32) -> Level {
        let ground = GroundSet { n };
        let next = if k > n { None } else { Some(low_bits(k)) };
        Level { ground, next }
    }
}

impl Iterator for Level {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = next_same_weight(cur, self.ground.n);
        Some(Subset { ground: self.ground, mask: cur })
    }
}

/// Next mask with the same popcount inside the low `n` bits.
pub(crate) fn next_same_weight(mask: u64, n: u32) -> Option<u64> {
    if mask == 0 {
        return None;
    }
    let c = mask & mask.wrapping_neg();
    let (r, overflow) = mask.overflowing_add(c);
    if overflow {
        return None;
    }
    let next = (((r ^ mask) >> 2) / c) | r;
    if next & !low_bits(n) != 0 {
        None
    } else {
        Some(next)
    }
}

/// Position of a mask among all masks of the same popcount, in ascending
/// mask (colexicographic) order.
pub fn colex_rank(mask: u64) -> u64 {
    let mut rank = 0u64;
    let mut rest = mask;
    let mut t = 1u32;
    while rest != 0 {
        let p = rest.trailing_zeros();
        rank += binomial(p, t);
        rest &= rest - 1;
        t += 1;
    }
    rank
}

/// `binom(n, k)` in `u64`; panics on overflow, which needs `n > 66`.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// `binom(n, k)` as a big integer, for arguments far beyond `u64`.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// The circular interval `[i, j]_n` of `Z_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CircularInterval {
    ground: GroundSet,
    start: u32,
    end: u32,
}

/// Build `[i, j]_n`: `[i, j]` when `i <= j`, else `[i, n] ∪ [1, j]`.
pub fn interval_mod(ground: GroundSet, i: u32, j: u32) -> Result<CircularInterval> {
    ground.check_element(i)?;
    ground.check_element(j)?;
    Ok(CircularInterval { ground, start: i, end: j })
}

impl CircularInterval {
    pub fn start(self) -> u32 {
        self.start
    }

    pub fn end(self) -> u32 {
        self.end
    }

    pub fn wraps(self) -> bool {
        self.start > self.end
    }

    pub fn len(self) -> u32 {
        circular_len(self.ground.n, self.start, self.end)
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn mask(self) -> u64 {
        circular_mask(self.ground.n, self.start, self.end)
    }

    pub fn contains(self, e: u32) -> bool {
        e >= 1 && e <= self.ground.n && self.mask() >> (e - 1) & 1 == 1
    }

    pub fn as_subset(self) -> Subset {
        Subset { ground: self.ground, mask: self.mask() }
    }

    /// `true` when `self ⊆ other` as sets.
    pub fn within(self, other: CircularInterval) -> bool {
        self.mask() & !other.mask() == 0
    }
}

#[inline]
pub(crate) fn circular_len(n: u32, i: u32, j: u32) -> u32 {
    if i <= j {
        j - i + 1
    } else {
        n - i + 1 + j
    }
}

#[inline]
pub(crate) fn circular_mask(n: u32, i: u32, j: u32) -> u64 {
    if i <= j {
        range_mask(i, j)
    } else {
        range_mask(i, n) | range_mask(1, j)
    }
}

/// `c_x(i, j) = |x ∩ [i, j]| - |[i, j] \ x|`.
pub fn disc_count(x: Subset, i: u32, j: u32) -> Result<i32> {
    let g = x.ground;
    g.check_element(i)?;
    g.check_element(j)?;
    if i > j {
        return Err(Error::input(format!("c_x(i, j) needs i <= j, got ({i}, {j})")));
    }
    let inside = (x.mask & range_mask(i, j)).count_ones() as i32;
    Ok(2 * inside - (j - i + 1) as i32)
}

/// `c'_x(i, j) = |[i, j]_n ∩ x| - |[i, j]_n \ x|`.
pub fn circ_count(x: Subset, i: u32, j: u32) -> Result<i32> {
    let iv = interval_mod(x.ground, i, j)?;
    let inside = (x.mask & iv.mask()).count_ones() as i32;
    Ok(2 * inside - iv.len() as i32)
}
