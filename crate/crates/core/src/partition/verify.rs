use std::collections::HashMap;

use serde::Serialize;

use super::{ChainPartition, Universe};
use crate::lattice::{GroundSet, Subset};
use crate::signature::mirror_mask;
use crate::symposet::less_masks;

/// Optional per-chain and global requirements on top of being a partition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Requirements {
    pub skipless: bool,
    pub rank_symmetric: bool,
    /// Skipless and rank-symmetric.
    pub symmetric: bool,
    pub count: Option<usize>,
    pub min_size: Option<usize>,
    pub max_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Failure {
    EmptyChain { chain: usize },
    OutsideUniverse { chain: usize, element: String },
    Duplicate { element: String, chains: [usize; 2] },
    Missing { count: u64, example: Option<String> },
    NotAChain { chain: usize, lower: String, upper: String },
    NotOrdered { chain: usize, lower: String, upper: String },
    NotSkipless { chain: usize, ranks: Vec<u32> },
    NotRankSymmetric { chain: usize, ranks: Vec<u32> },
    TooShort { chain: usize, size: usize, min: usize },
    TooLong { chain: usize, size: usize, max: usize },
    WrongCount { expected: usize, actual: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub chains: usize,
    pub elements: u64,
    pub min_size: usize,
    pub max_size: usize,
    /// Total number of failures, of which the first few are listed.
    pub failure_count: usize,
    pub failures: Vec<Failure>,
}

const LISTED_FAILURES: usize = 20;

struct Log {
    count: usize,
    listed: Vec<Failure>,
}

impl Log {
    fn push(&mut self, f: Failure) {
        self.count += 1;
        if self.listed.len() < LISTED_FAILURES {
            self.listed.push(f);
        }
    }
}

/// Track which chain owns each element: a bitmap-backed table for moderate
/// `n`, a hash map beyond that.
enum Owners {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl Owners {
    fn new(n: u32) -> Owners {
        if n <= 24 {
            Owners::Dense(vec![u32::MAX; 1usize << n])
        } else {
            Owners::Sparse(HashMap::new())
        }
    }

    fn claim(&mut self, mask: u64, chain: u32) -> Option<u32> {
        match self {
            Owners::Dense(v) => {
                let slot = &mut v[mask as usize];
                if *slot == u32::MAX {
                    *slot = chain;
                    None
                } else {
                    Some(*slot)
                }
            }
            Owners::Sparse(m) => match m.entry(mask) {
                std::collections::hash_map::Entry::Occupied(e) => Some(*e.get()),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(chain);
                    None
                }
            },
        }
    }

    fn first_missing(&self, ground: GroundSet, universe: Universe) -> Option<u64> {
        match self {
            Owners::Dense(v) => (0..v.len() as u64)
                .find(|&m| universe.contains_rank(ground, m.count_ones()) && v[m as usize] == u32::MAX),
            Owners::Sparse(_) => None,
        }
    }
}

fn render(ground: GroundSet, mask: u64) -> String {
    ground.subset(mask).map(|s| s.to_string()).unwrap_or_else(|_| format!("{mask:#x}"))
}

/// Check that `chains` partition `universe` into chains satisfying `req`.
/// Elements inside a chain may come in any order.
pub fn verify_chains(
    ground: GroundSet,
    universe: Universe,
    chains: &[Vec<Subset>],
    req: &Requirements,
) -> Verdict {
    let n = ground.n();
    let mut log = Log { count: 0, listed: Vec::new() };
    let mut owners = Owners::new(n);
    let mut distinct = 0u64;
    let mut elements = 0u64;
    let within_q = universe.within_q();
    let skipless = req.skipless || req.symmetric;
    let rank_symmetric = req.rank_symmetric || req.symmetric;

    for (ci, chain) in chains.iter().enumerate() {
        if chain.is_empty() {
            log.push(Failure::EmptyChain { chain: ci });
            continue;
        }
        let mut masks: Vec<u64> = chain.iter().map(|s| s.mask()).collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        elements += masks.len() as u64;
        for &m in &masks {
            if m & !ground.full_mask() != 0 || !universe.contains_rank(ground, m.count_ones()) {
                log.push(Failure::OutsideUniverse { chain: ci, element: render(ground, m) });
                continue;
            }
            match owners.claim(m, ci as u32) {
                None => distinct += 1,
                Some(other) => log.push(Failure::Duplicate {
                    element: render(ground, m),
                    chains: [other as usize, ci],
                }),
            }
        }
        let mut is_chain = true;
        for w in masks.windows(2) {
            let (y, x) = (w[0], w[1]);
            if y == x || y & !x != 0 {
                is_chain = false;
                log.push(Failure::NotAChain {
                    chain: ci,
                    lower: render(ground, y),
                    upper: render(ground, x),
                });
                break;
            }
            if within_q
                && ground.rank_in_q(y.count_ones())
                && !less_masks(y, mirror_mask(n, y), x, mirror_mask(n, x))
            {
                log.push(Failure::NotOrdered {
                    chain: ci,
                    lower: render(ground, y),
                    upper: render(ground, x),
                });
            }
        }
        let ranks: Vec<u32> = masks.iter().map(|m| m.count_ones()).collect();
        if is_chain && skipless && ranks.windows(2).any(|w| w[1] != w[0] + 1) {
            log.push(Failure::NotSkipless { chain: ci, ranks: ranks.clone() });
        }
        let k = ranks.len();
        if rank_symmetric && (0..k).any(|i| ranks[i] + ranks[k - 1 - i] != n) {
            log.push(Failure::NotRankSymmetric { chain: ci, ranks: ranks.clone() });
        }
        if let Some(min) = req.min_size {
            if k < min {
                log.push(Failure::TooShort { chain: ci, size: k, min });
            }
        }
        if let Some(max) = req.max_size {
            if k > max {
                log.push(Failure::TooLong { chain: ci, size: k, max });
            }
        }
    }

    let expected = universe.size(ground);
    if distinct < expected {
        let example = owners.first_missing(ground, universe).map(|m| render(ground, m));
        log.push(Failure::Missing { count: expected - distinct, example });
    }
    if let Some(count) = req.count {
        if count != chains.len() {
            log.push(Failure::WrongCount { expected: count, actual: chains.len() });
        }
    }

    Verdict {
        ok: log.count == 0,
        chains: chains.len(),
        elements,
        min_size: chains.iter().map(Vec::len).min().unwrap_or(0),
        max_size: chains.iter().map(Vec::len).max().unwrap_or(0),
        failure_count: log.count,
        failures: log.listed,
    }
}

pub fn verify_partition(p: &ChainPartition, req: &Requirements) -> Verdict {
    verify_chains(p.ground, p.universe, &p.as_lists(), req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::btk_scd;

    fn g(n: u32) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    fn s(n: u32, e: &[u32]) -> Subset {
        g(n).from_elements(e.iter().copied()).unwrap()
    }

    #[test]
    fn btk_passes_symmetric_requirements() {
        for n in 1..=12 {
            let p = btk_scd(g(n));
            let req = Requirements {
                symmetric: true,
                count: Some(g(n).width() as usize),
                ..Requirements::default()
            };
            let v = verify_partition(&p, &req);
            assert!(v.ok, "n={n}: {v:?}");
        }
    }

    #[test]
    fn rank_symmetry_failure_names_the_chain() {
        let chains = vec![vec![s(2, &[]), s(2, &[1])], vec![s(2, &[2]), s(2, &[1, 2])]];
        let req = Requirements { rank_symmetric: true, ..Requirements::default() };
        let v = verify_chains(g(2), Universe::Lattice, &chains, &req);
        assert!(!v.ok);
        assert!(v.failures.contains(&Failure::NotRankSymmetric { chain: 0, ranks: vec![0, 1] }));
    }

    #[test]
    fn duplicate_is_reported() {
        let chains = vec![
            vec![s(2, &[]), s(2, &[1]), s(2, &[1, 2])],
            vec![s(2, &[2]), s(2, &[1, 2])],
        ];
        let v = verify_chains(g(2), Universe::Lattice, &chains, &Requirements::default());
        assert!(!v.ok);
        assert!(v.failures.contains(&Failure::Duplicate { element: "{1,2}".into(), chains: [0, 1] }));
    }

    #[test]
    fn missing_and_non_chain() {
        let chains = vec![vec![s(2, &[1]), s(2, &[2])]];
        let v = verify_chains(g(2), Universe::Lattice, &chains, &Requirements::default());
        assert!(v.failures.iter().any(|f| matches!(f, Failure::NotAChain { chain: 0, .. })));
        assert!(v.failures.iter().any(|f| matches!(f, Failure::Missing { count: 2, .. })));
    }

    #[test]
    fn order_inside_q_is_checked() {
        // {1,2} ⊂ {1,2,3} but not {1,2} < {1,2,3}
        let chains = vec![vec![s(4, &[1, 2]), s(4, &[1, 2, 3])]];
        let v = verify_chains(
            g(4),
            Universe::QLevels { lo: 2, hi: 3 },
            &chains,
            &Requirements::default(),
        );
        assert!(v.failures.iter().any(|f| matches!(f, Failure::NotOrdered { .. })));
    }
}
