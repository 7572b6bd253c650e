//! Linear and circular signatures, the symmetric chain through a subset,
//! and the mirror bijection `p` between the upper and lower halves.
//!
//! A subset is read as a bracket string: members are `(`, non-members `)`.
//! Matched brackets carry the symbols `1`/`0` and point at each other;
//! unmatched positions are stars. The circular variant additionally pairs
//! the leftover `)` prefix with the leftover `(` suffix across the wrap,
//! innermost first.

use std::fmt;

use serde::Serialize;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::lattice::{circular_len, CircularInterval, GroundSet, Subset, SubsetFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Star => '*',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Linear,
    Circular,
}

/// Result of bracket matching on a mask. `pairs[i]` holds the 1-indexed
/// partner of element `i + 1`, or 0 for stars.
#[derive(Clone, Copy)]
pub(crate) struct Matched {
    pub ones: u64,
    pub zeros: u64,
    pub stars: u64,
    pub pairs: [u8; 64],
}

pub(crate) fn match_linear(n: u32, mask: u64) -> Matched {
    let mut stack = [0u8; 64];
    let mut top = 0usize;
    let mut out = Matched { ones: 0, zeros: 0, stars: 0, pairs: [0; 64] };
    for i in 0..n as usize {
        if mask >> i & 1 == 1 {
            stack[top] = i as u8;
            top += 1;
        } else if top > 0 {
            top -= 1;
            let j = stack[top] as usize;
            out.ones |= 1 << j;
            out.zeros |= 1 << i;
            out.pairs[j] = i as u8 + 1;
            out.pairs[i] = j as u8 + 1;
        }
    }
    out.stars = crate::lattice::low_bits(n) & !(out.ones | out.zeros);
    out
}

pub(crate) fn match_circular(n: u32, mask: u64) -> Matched {
    let mut out = match_linear(n, mask);
    let mut closers = out.stars & !mask;
    let mut openers = out.stars & mask;
    // last unmatched opener pairs with the first unmatched closer, and so on
    while closers != 0 && openers != 0 {
        let j = closers.trailing_zeros() as usize;
        let i = 63 - openers.leading_zeros() as usize;
        closers &= closers - 1;
        openers &= !(1 << i);
        out.ones |= 1 << i;
        out.zeros |= 1 << j;
        out.pairs[i] = j as u8 + 1;
        out.pairs[j] = i as u8 + 1;
    }
    out.stars = closers | openers;
    out
}

/// `p(x)` on masks, for `2|x| >= n`.
pub(crate) fn mirror_mask(n: u32, mask: u64) -> u64 {
    let m = match_linear(n, mask);
    let k = mask.count_ones();
    let mut tail = m.stars & mask;
    for _ in 0..(2 * k - n) {
        tail &= tail - 1;
    }
    m.ones | tail
}

/// `*'(x)` on masks.
#[inline]
pub(crate) fn circular_star_mask(n: u32, mask: u64) -> u64 {
    match_circular(n, mask).stars
}

/// Closers `pr'_y(j)` of the maximal intervals of `I'(y)`, for `2|y| >= n`.
pub(crate) fn maximal_closers(n: u32, mask: u64) -> u64 {
    let m = match_circular(n, mask);
    // Cut the circle after a prefix of minimal discrepancy; no circular
    // interval crosses that cut when 2|y| >= n.
    let mut best = 0i32;
    let mut cut = 0u32;
    let mut s = 0i32;
    for i in 0..n {
        s += if mask >> i & 1 == 1 { 1 } else { -1 };
        if s < best {
            best = s;
            cut = i + 1;
        }
    }
    let mut depth = 0u32;
    let mut out = 0u64;
    for step in 0..n {
        let i = (cut + step) % n;
        let bit = 1u64 << i;
        if m.ones & bit != 0 {
            depth += 1;
        } else if m.zeros & bit != 0 {
            depth -= 1;
            if depth == 0 {
                out |= bit;
            }
        }
    }
    out
}

/// The signature `sg(x)` or circular signature `csg(x)` of a subset.
#[derive(Clone, PartialEq, Eq)]
pub struct Signature {
    ground: GroundSet,
    variant: Variant,
    symbols: Vec<Symbol>,
    pairs: Vec<Option<u32>>,
}

impl Signature {
    fn from_matched(ground: GroundSet, variant: Variant, m: &Matched) -> Signature {
        let n = ground.n() as usize;
        let mut symbols = Vec::with_capacity(n);
        let mut pairs = Vec::with_capacity(n);
        for i in 0..n {
            let bit = 1u64 << i;
            let sym = if m.ones & bit != 0 {
                Symbol::One
            } else if m.zeros & bit != 0 {
                Symbol::Zero
            } else {
                Symbol::Star
            };
            symbols.push(sym);
            pairs.push((m.pairs[i] != 0).then_some(m.pairs[i] as u32));
        }
        Signature { ground, variant, symbols, pairs }
    }

    /// Assemble a signature from explicit per-element data (1-indexed by position).
    pub fn from_parts(
        ground: GroundSet,
        variant: Variant,
        symbols: Vec<Symbol>,
        pairs: Vec<Option<u32>>,
    ) -> Result<Signature> {
        let n = ground.n() as usize;
        if symbols.len() != n || pairs.len() != n {
            return Err(Error::input("signature arrays must have length n"));
        }
        Ok(Signature { ground, variant, symbols, pairs })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Symbol of element `i` (1-indexed).
    pub fn symbol(&self, i: u32) -> Symbol {
        self.symbols[i as usize - 1]
    }

    /// Partner of element `i`, `None` for stars.
    pub fn pair(&self, i: u32) -> Option<u32> {
        self.pairs[i as usize - 1]
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn pairs(&self) -> &[Option<u32>] {
        &self.pairs
    }

    fn with_symbol(&self, sym: Symbol) -> Subset {
        let mask = self
            .symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == sym)
            .fold(0u64, |m, (i, _)| m | 1 << i);
        self.ground.subset(mask).expect("mask within ground set")
    }

    pub fn stars(&self) -> Subset {
        self.with_symbol(Symbol::Star)
    }

    pub fn ones(&self) -> Subset {
        self.with_symbol(Symbol::One)
    }

    pub fn zeros(&self) -> Subset {
        self.with_symbol(Symbol::Zero)
    }

    /// `I(x)` or `I'(x)`: the intervals `[i, pair(i)]` for every `1` symbol.
    pub fn intervals(&self) -> Vec<CircularInterval> {
        (1..=self.ground.n())
            .filter(|&i| self.symbol(i) == Symbol::One)
            .map(|i| {
                self.ground
                    .interval(i, self.pair(i).expect("ones are paired"))
                    .expect("elements in range")
            })
            .collect()
    }

    /// Intervals not strictly contained in another interval of the system.
    pub fn maximal_intervals(&self) -> Vec<CircularInterval> {
        let all = self.intervals();
        all.iter()
            .copied()
            .filter(|iv| !all.iter().any(|o| o != iv && iv.within(*o)))
            .collect()
    }

    /// Compact symbol string, e.g. `***101100*10`.
    pub fn symbol_string(&self) -> String {
        self.symbols.iter().map(|s| s.as_char()).collect()
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.variant, self.symbol_string())
    }
}

/// JSON view of a signature.
#[derive(Debug, Serialize)]
pub struct SignatureJson {
    pub n: u32,
    pub variant: Variant,
    pub symbols: String,
    pub pairs: Vec<Option<u32>>,
    pub stars: String,
    pub ones: String,
    pub zeros: String,
}

impl From<&Signature> for SignatureJson {
    fn from(s: &Signature) -> Self {
        s.to_json(SubsetFormat::Set)
    }
}

impl Signature {
    pub fn to_json(&self, format: SubsetFormat) -> SignatureJson {
        SignatureJson {
            n: self.ground.n(),
            variant: self.variant,
            symbols: self.symbol_string(),
            pairs: self.pairs.clone(),
            stars: self.stars().render(format),
            ones: self.ones().render(format),
            zeros: self.zeros().render(format),
        }
    }
}

/// The signature `sg(x)`, by one left-to-right bracket scan.
pub fn signature(x: Subset) -> Signature {
    let m = match_linear(x.n(), x.mask());
    Signature::from_matched(x.ground(), Variant::Linear, &m)
}

/// The circular signature `csg(x)`.
pub fn circular_signature(x: Subset) -> Signature {
    let m = match_circular(x.n(), x.mask());
    Signature::from_matched(x.ground(), Variant::Circular, &m)
}

/// How the linear stars of `x` behave under the circular signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarAlignment {
    /// `i_1 < ... < i_t`: linear stars inside `x`.
    pub members: Vec<u32>,
    /// `j_1 < ... < j_s`: linear stars outside `x`, `s = t - (2k - n)`.
    pub non_members: Vec<u32>,
    /// `i_1, ..., i_{2k-n}`, which stay stars circularly.
    pub circular_stars: Vec<u32>,
    /// `(i_r, j_{t+1-r})` for `r > 2k - n`.
    pub circular_pairs: Vec<(u32, u32)>,
}

/// Align the linear stars of `x` with its circular signature and check the
/// resulting pairing against `csg(x)`. Requires `2|x| >= n`.
pub fn star_pair_alignment(x: Subset) -> Result<StarAlignment> {
    let n = x.n();
    let k = x.rank();
    if 2 * k < n {
        return Err(Error::input(format!(
            "star alignment needs |x| >= n/2, got |x| = {k}, n = {n}"
        )));
    }
    let sg = signature(x);
    let csg = circular_signature(x);
    let stars = sg.stars();
    let members: Vec<u32> = stars.elements().filter(|&e| x.contains(e)).collect();
    let non_members: Vec<u32> = stars.elements().filter(|&e| !x.contains(e)).collect();
    let t = members.len();
    let fixed = (2 * k - n) as usize;
    if non_members.len() + fixed != t {
        return Err(Error::Construction(format!(
            "star counts inconsistent for {x}: t = {t}, s = {}",
            non_members.len()
        )));
    }
    let circular_stars = members[..fixed].to_vec();
    let circular_pairs: Vec<(u32, u32)> = (fixed..t)
        .map(|r| (members[r], non_members[t - 1 - r]))
        .collect();
    for &i in &circular_stars {
        if csg.symbol(i) != Symbol::Star {
            return Err(Error::Construction(format!("csg({x}) at {i} should be a star")));
        }
    }
    for &(i, j) in &circular_pairs {
        let ok = csg.symbol(i) == Symbol::One
            && csg.pair(i) == Some(j)
            && csg.symbol(j) == Symbol::Zero
            && csg.pair(j) == Some(i);
        if !ok {
            return Err(Error::Construction(format!(
                "csg({x}) should pair {i} with {j}"
            )));
        }
    }
    Ok(StarAlignment { members, non_members, circular_stars, circular_pairs })
}

/// The symmetric chain `{y : sg(y) = sg(x)}` containing `x`.
pub fn btk_chain(x: Subset) -> Chain {
    let m = match_linear(x.n(), x.mask());
    chain_from_parts(x.ground(), m.ones, m.stars)
}

/// Chain `ones ∪ {top u stars}` for `u = 0..=t`.
pub(crate) fn chain_from_parts(ground: GroundSet, ones: u64, stars: u64) -> Chain {
    let mut elements = Vec::with_capacity(stars.count_ones() as usize + 1);
    let mut cur = ones;
    elements.push(cur);
    let mut rest = stars;
    while rest != 0 {
        let top = 63 - rest.leading_zeros();
        rest &= !(1 << top);
        cur |= 1 << top;
        elements.push(cur);
    }
    let elements = elements
        .into_iter()
        .map(|m| ground.subset(m).expect("mask within ground set"))
        .collect();
    Chain::from_sorted_unchecked(ground, elements)
}

/// The mirror `p(x)`: the member of the chain through `x` with rank `n - |x|`.
pub fn mirror(x: Subset) -> Result<Subset> {
    if !x.in_q() {
        return Err(Error::domain(format!(
            "p is defined on ranks >= n/2; {x} has rank {} with n = {}",
            x.rank(),
            x.n()
        )));
    }
    Ok(x.ground().subset(mirror_mask(x.n(), x.mask())).expect("submask"))
}

/// Inverse of [`mirror`]: for `|y| <= n/2`, the member of the chain through
/// `y` with rank `n - |y|`.
pub fn mirror_inv(y: Subset) -> Result<Subset> {
    let n = y.n();
    let k = y.rank();
    if 2 * k > n {
        return Err(Error::domain(format!(
            "mirror_inv is defined on ranks <= n/2; {y} has rank {k} with n = {n}"
        )));
    }
    let m = match_linear(n, y.mask());
    let need = n - k - m.ones.count_ones();
    let mut stars = m.stars;
    let mut out = m.ones;
    for _ in 0..need {
        let top = 63 - stars.leading_zeros();
        stars &= !(1 << top);
        out |= 1 << top;
    }
    Ok(y.ground().subset(out).expect("within ground"))
}

/// Length of the circular interval `[i, j]_n`.
#[inline]
pub(crate) fn arc_len(n: u32, i: u32, j: u32) -> u32 {
    circular_len(n, i, j)
}
