use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{GroundSet, Subset};

/// A chain `c_0 ⊂ c_1 ⊂ ... ⊂ c_k` of subsets of `[n]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    ground: GroundSet,
    elements: Vec<Subset>,
}

impl Chain {
    /// Sorts `elements` by rank and checks strict inclusion between neighbours.
    pub fn new(ground: GroundSet, mut elements: Vec<Subset>) -> Result<Chain> {
        if elements.is_empty() {
            return Err(Error::input("a chain needs at least one element"));
        }
        if let Some(bad) = elements.iter().find(|s| s.ground() != ground) {
            return Err(Error::input(format!(
                "element {bad} does not live in [{}]",
                ground.n()
            )));
        }
        elements.sort_by_key(|s| (s.rank(), s.mask()));
        for w in elements.windows(2) {
            if w[0].rank() == w[1].rank() || !w[0].is_subset_of(w[1]) {
                return Err(Error::input(format!("{} and {} are not comparable", w[0], w[1])));
            }
        }
        Ok(Chain { ground, elements })
    }

    pub(crate) fn from_sorted_unchecked(ground: GroundSet, elements: Vec<Subset>) -> Chain {
        debug_assert!(elements.windows(2).all(|w| w[0].rank() < w[1].rank()
            && w[0].is_subset_of(w[1])));
        Chain { ground, elements }
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn elements(&self) -> &[Subset] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn bottom(&self) -> Subset {
        self.elements[0]
    }

    pub fn top(&self) -> Subset {
        *self.elements.last().expect("chains are nonempty")
    }

    pub fn ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.elements.iter().map(|s| s.rank())
    }

    /// `|c_i| = |c_0| + i` for every `i`.
    pub fn is_skipless(&self) -> bool {
        self.elements.windows(2).all(|w| w[1].rank() == w[0].rank() + 1)
    }

    /// `|c_i| + |c_{k-i}| = n` for every `i`.
    pub fn is_rank_symmetric(&self) -> bool {
        let n = self.ground.n();
        let k = self.elements.len();
        (0..k).all(|i| self.elements[i].rank() + self.elements[k - 1 - i].rank() == n)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_skipless() && self.is_rank_symmetric()
    }

    pub fn contains(&self, x: Subset) -> bool {
        self.elements.binary_search_by_key(&(x.rank(), x.mask()), |s| (s.rank(), s.mask())).is_ok()
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.elements.iter().map(|s| s.to_string())).finish()
    }
}
