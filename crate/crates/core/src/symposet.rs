//! The poset `(Q, <)` on `Q = [n]^(>= n/2)`, where `y < x` iff
//! `p(x) ⊆ p(y) ⊆ y ⊊ x`.
//!
//! Down-covers of `x` are `x \ {i}` for the circular stars `i` of `x`;
//! up-covers of `y` add the closing element of each maximal interval of
//! `I'(y)`. Consecutive levels form a bipartite graph carrying an explicit
//! edge weighting whose vertex sums are constant on each side, which
//! certifies the normalized matching property.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{binomial, colex_rank, GroundSet, Subset};
use crate::matching::{BipartiteGraph, FlowNetwork};
use crate::signature::{arc_len, circular_star_mask, maximal_closers, mirror_mask};

fn require_q(x: Subset, what: &str) -> Result<()> {
    if x.in_q() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what}: {x} has rank {} < n/2 with n = {}",
            x.rank(),
            x.n()
        )))
    }
}

/// Mask-level comparison for elements already known to be in `Q`.
#[inline]
pub(crate) fn less_masks(y: u64, py: u64, x: u64, px: u64) -> bool {
    y != x && y & !x == 0 && py & !y == 0 && px & !py == 0
}

/// `y < x` in `(Q, <)`.
pub fn less(y: Subset, x: Subset) -> Result<bool> {
    require_q(y, "less")?;
    require_q(x, "less")?;
    if y.ground() != x.ground() {
        return Err(Error::input("subsets of different ground sets"));
    }
    let n = x.n();
    Ok(less_masks(y.mask(), mirror_mask(n, y.mask()), x.mask(), mirror_mask(n, x.mask())))
}

/// Elements of rank `|x| - 1` covered by `x`, ascending by mask.
pub fn covers_down(x: Subset) -> Result<Vec<Subset>> {
    require_q(x, "covers_down")?;
    let g = x.ground();
    if x.rank() == 0 || !g.rank_in_q(x.rank() - 1) {
        return Ok(Vec::new());
    }
    let stars = circular_star_mask(x.n(), x.mask());
    let mut out: Vec<Subset> = bits(stars)
        .map(|i| g.subset(x.mask() & !(1 << i)).expect("submask"))
        .collect();
    out.sort();
    Ok(out)
}

/// Elements of rank `|y| + 1` covering `y`, ascending by mask.
pub fn covers_up(y: Subset) -> Result<Vec<Subset>> {
    require_q(y, "covers_up")?;
    let g = y.ground();
    let closers = maximal_closers(y.n(), y.mask());
    let mut out: Vec<Subset> = bits(closers)
        .map(|i| g.subset(y.mask() | 1 << i).expect("within ground"))
        .collect();
    out.sort();
    Ok(out)
}

fn bits(mut m: u64) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros();
            m &= m - 1;
            Some(i)
        }
    })
}

/// Weight of the cover edge `y < x`: with `*'(x) = {i_1 < ... < i_m}` and
/// `y = x \ {i_u}`, the length of `[i_{u-1}, i_u]_n` (index taken mod `m`).
pub fn edge_weight(y: Subset, x: Subset) -> Result<u32> {
    require_q(x, "edge_weight")?;
    let n = x.n();
    let removed = x.mask() & !y.mask();
    let valid_shape = y.ground() == x.ground()
        && y.mask() & !x.mask() == 0
        && removed.count_ones() == 1
        && y.in_q();
    let stars = circular_star_mask(n, x.mask());
    if !valid_shape || stars & removed == 0 {
        return Err(Error::input(format!("{y} < {x} is not a cover edge of (Q,<)")));
    }
    Ok(weight_for_removed(n, stars, removed.trailing_zeros()))
}

fn weight_for_removed(n: u32, stars: u64, pos: u32) -> u32 {
    let below = stars & ((1u64 << pos) - 1);
    let prev = if below != 0 {
        63 - below.leading_zeros()
    } else {
        63 - stars.leading_zeros()
    };
    arc_len(n, prev + 1, pos + 1)
}

/// One edge of a [`LevelGraph`], by vertex index on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelEdge {
    pub lower: u32,
    pub upper: u32,
    pub weight: u32,
}

/// Cover graph of `(Q, <)` between ranks `k - 1` and `k`.
#[derive(Clone, Debug)]
pub struct LevelGraph {
    ground: GroundSet,
    upper_rank: u32,
    lower: Vec<Subset>,
    upper: Vec<Subset>,
    edges: Vec<LevelEdge>,
}

/// Build the level graph with upper rank `k`, `ceil(n/2) + 1 <= k <= n`.
pub fn level_graph(ground: GroundSet, k: u32) -> Result<LevelGraph> {
    let n = ground.n();
    let lo = ground.q_bottom_rank() + 1;
    if k < lo || k > n {
        return Err(Error::input(format!(
            "level graph rank must lie in [{lo}, {n}] for n = {n}, got {k}"
        )));
    }
    let lower: Vec<Subset> = ground.level(k - 1).collect();
    let upper: Vec<Subset> = ground.level(k).collect();
    let mut edges = Vec::with_capacity(upper.len() * (2 * k - n) as usize);
    for (ui, x) in upper.iter().enumerate() {
        let stars = circular_star_mask(n, x.mask());
        for i in bits(stars) {
            let y = x.mask() & !(1 << i);
            edges.push(LevelEdge {
                lower: colex_rank(y) as u32,
                upper: ui as u32,
                weight: weight_for_removed(n, stars, i),
            });
        }
    }
    Ok(LevelGraph { ground, upper_rank: k, lower, upper, edges })
}

impl LevelGraph {
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn upper_rank(&self) -> u32 {
        self.upper_rank
    }

    pub fn lower_rank(&self) -> u32 {
        self.upper_rank - 1
    }

    pub fn lower(&self) -> &[Subset] {
        &self.lower
    }

    pub fn upper(&self) -> &[Subset] {
        &self.upper
    }

    pub fn edges(&self) -> &[LevelEdge] {
        &self.edges
    }

    /// Side `A` is the lower level, side `B` the upper level.
    pub fn to_bipartite(&self) -> BipartiteGraph {
        BipartiteGraph::new(
            self.lower.len(),
            self.upper.len(),
            self.edges.iter().map(|e| (e.lower as usize, e.upper as usize)).collect(),
        )
    }

    /// Weight sums per lower vertex and per upper vertex.
    pub fn weight_sums(&self) -> (Vec<u64>, Vec<u64>) {
        let mut lo = vec![0u64; self.lower.len()];
        let mut up = vec![0u64; self.upper.len()];
        for e in &self.edges {
            lo[e.lower as usize] += e.weight as u64;
            up[e.upper as usize] += e.weight as u64;
        }
        (lo, up)
    }

    /// `(2n - 2k + 2, 2k)`: the constant sums on the lower and upper side.
    pub fn expected_sums(&self) -> (u64, u64) {
        let n = self.ground.n() as u64;
        let k = self.upper_rank as u64;
        (2 * n - 2 * k + 2, 2 * k)
    }

    pub fn weights_are_certificate(&self) -> bool {
        let (lo, up) = self.weight_sums();
        let (a, b) = self.expected_sums();
        lo.iter().all(|&s| s == a) && up.iter().all(|&s| s == b)
    }

    pub fn to_json(&self, format: crate::lattice::SubsetFormat) -> LevelGraphJson {
        LevelGraphJson {
            n: self.ground.n(),
            lower_rank: self.lower_rank(),
            upper_rank: self.upper_rank,
            lower: self.lower.iter().map(|s| s.render(format)).collect(),
            upper: self.upper.iter().map(|s| s.render(format)).collect(),
            edges: self.edges.iter().map(|e| [e.lower, e.upper, e.weight]).collect(),
        }
    }
}

/// Serialized level graph; edges are `[lower index, upper index, weight]`.
#[derive(Debug, Serialize)]
pub struct LevelGraphJson {
    pub n: u32,
    pub lower_rank: u32,
    pub upper_rank: u32,
    pub lower: Vec<String>,
    pub upper: Vec<String>,
    pub edges: Vec<[u32; 3]>,
}

/// Which engine decides the normalized matching property.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NmEngine {
    /// Exhaustive when the smaller side has at most 20 vertices, flow otherwise.
    #[default]
    Auto,
    Exhaustive,
    Flow,
}

/// Largest side enumerated by the exhaustive engine.
pub const EXHAUSTIVE_SIDE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NmWitness {
    /// `|X| / |S| > |Γ(X)| / |other side|` for this `X ⊆ S`.
    Violation { side: Side, subset: Vec<usize>, neighbours: usize },
    /// Edge weights (in edge order) with sum `a` at every A-vertex and `b`
    /// at every B-vertex.
    Weights { a: u64, b: u64, weights: Vec<u64> },
    /// Every subset of the listed sides was checked.
    Exhausted { sides: Vec<Side> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NmVerdict {
    pub holds: bool,
    pub engine: NmEngine,
    pub witness: NmWitness,
}

/// Decide whether `|X|/|A| <= |Γ(X)|/|B|` for every `X ⊆ A`.
pub fn verify_normalized_matching(g: &BipartiteGraph, engine: NmEngine) -> Result<NmVerdict> {
    if g.a == 0 || g.b == 0 {
        return Err(Error::input("normalized matching needs two nonempty sides"));
    }
    let small = g.a.min(g.b);
    let engine = match engine {
        NmEngine::Auto if small <= EXHAUSTIVE_SIDE_LIMIT => NmEngine::Exhaustive,
        NmEngine::Auto => NmEngine::Flow,
        e => e,
    };
    match engine {
        NmEngine::Exhaustive => {
            if small > EXHAUSTIVE_SIDE_LIMIT {
                return Err(Error::resource(
                    "exhaustive normalized matching check",
                    format!("2^{small} subsets"),
                ));
            }
            let mut sides = Vec::new();
            for side in [Side::A, Side::B] {
                let oriented = match side {
                    Side::A => g.clone(),
                    Side::B => g.transpose(),
                };
                if oriented.a > EXHAUSTIVE_SIDE_LIMIT {
                    continue;
                }
                if let Some((subset, neighbours)) = exhaustive_violation(&oriented) {
                    return Ok(NmVerdict {
                        holds: false,
                        engine,
                        witness: NmWitness::Violation { side, subset, neighbours },
                    });
                }
                sides.push(side);
            }
            Ok(NmVerdict { holds: true, engine, witness: NmWitness::Exhausted { sides } })
        }
        _ => Ok(flow_verdict(g)),
    }
}

/// Gray-code sweep over all `X ⊆ A`, tracking neighbour multiplicities in `B`.
fn exhaustive_violation(g: &BipartiteGraph) -> Option<(Vec<usize>, usize)> {
    let adj = g.adjacency_a();
    let mut hits = vec![0u32; g.b];
    let mut covered = 0usize;
    let mut size = 0usize;
    let mut current = 0u64;
    let total = 1u64 << g.a;
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        current ^= 1 << flip;
        if current >> flip & 1 == 1 {
            size += 1;
            for &v in &adj[flip] {
                hits[v as usize] += 1;
                if hits[v as usize] == 1 {
                    covered += 1;
                }
            }
        } else {
            size -= 1;
            for &v in &adj[flip] {
                hits[v as usize] -= 1;
                if hits[v as usize] == 0 {
                    covered -= 1;
                }
            }
        }
        if (size as u128) * (g.b as u128) > (covered as u128) * (g.a as u128) {
            let subset = (0..g.a).filter(|&u| current >> u & 1 == 1).collect();
            return Some((subset, covered));
        }
    }
    None
}

/// Source arcs of capacity `|B|`, sink arcs of capacity `|A|`, unbounded
/// middle arcs; the property holds iff the max flow is `|A| * |B|`.
fn flow_verdict(g: &BipartiteGraph) -> NmVerdict {
    let (a, b) = (g.a, g.b);
    let s = a + b;
    let t = s + 1;
    let mut net = FlowNetwork::new(a + b + 2);
    let infinite = (a as i64) * (b as i64) + 1;
    for u in 0..a {
        net.add_edge(s, u, b as i64);
    }
    for v in 0..b {
        net.add_edge(a + v, t, a as i64);
    }
    let arcs: Vec<usize> = g.edges.iter().map(|&(u, v)| net.add_edge(u, a + v, infinite)).collect();
    let flow = net.max_flow(s, t);
    if flow == (a as i64) * (b as i64) {
        let weights = arcs.iter().map(|&id| net.flow(id) as u64).collect();
        NmVerdict {
            holds: true,
            engine: NmEngine::Flow,
            witness: NmWitness::Weights { a: b as u64, b: a as u64, weights },
        }
    } else {
        let side = net.source_side(s);
        let subset: Vec<usize> = (0..a).filter(|&u| side[u]).collect();
        let adj = g.adjacency_a();
        let mut nb = vec![false; b];
        for &u in &subset {
            for &v in &adj[u] {
                nb[v as usize] = true;
            }
        }
        let neighbours = nb.iter().filter(|&&x| x).count();
        NmVerdict {
            holds: false,
            engine: NmEngine::Flow,
            witness: NmWitness::Violation { side: Side::A, subset, neighbours },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub upper_rank: u32,
    pub lower_size: usize,
    pub upper_size: usize,
    pub edges: usize,
    pub holds: bool,
    pub engine: NmEngine,
    pub weight_certificate: bool,
    pub lower_sum: u64,
    pub upper_sum: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<NmWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PosetNmReport {
    pub n: u32,
    pub holds: bool,
    pub levels: Vec<LevelReport>,
}

/// Check one level graph with both the chosen engine and the explicit weights.
pub fn verify_level(ground: GroundSet, k: u32, engine: NmEngine) -> Result<LevelReport> {
    let g = level_graph(ground, k)?;
    let bip = g.to_bipartite();
    let verdict = verify_normalized_matching(&bip, engine)?;
    let (lower_sum, upper_sum) = g.expected_sums();
    Ok(LevelReport {
        upper_rank: k,
        lower_size: bip.a,
        upper_size: bip.b,
        edges: bip.edges.len(),
        holds: verdict.holds,
        engine: verdict.engine,
        weight_certificate: g.weights_are_certificate(),
        lower_sum,
        upper_sum,
        violation: (!verdict.holds).then_some(verdict.witness),
    })
}

/// Normalized matching of `(Q, <)`, checked on every consecutive level pair.
pub fn verify_poset_nm(ground: GroundSet, engine: NmEngine) -> Result<PosetNmReport> {
    let n = ground.n();
    let ranks: Vec<u32> = (ground.q_bottom_rank() + 1..=n).collect();
    let levels = ranks
        .par_iter()
        .map(|&k| verify_level(ground, k, engine))
        .collect::<Result<Vec<_>>>()?;
    let holds = levels.iter().all(|l| l.holds && l.weight_certificate);
    Ok(PosetNmReport { n, holds, levels })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub vertices: usize,
    pub edges: usize,
    pub is_tree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub n: u32,
    pub lower_rank: u32,
    pub upper_rank: u32,
    pub count: usize,
    pub all_trees: bool,
    /// Ordered by the smallest vertex index they contain, lower side first.
    pub components: Vec<Component>,
}

/// Connected components of a level graph and whether each is acyclic.
pub fn component_stats(g: &LevelGraph) -> ComponentReport {
    let a = g.lower.len();
    let total = a + g.upper.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &g.edges {
        let (u, v) = (e.lower as usize, a + e.upper as usize);
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru.max(rv)] = ru.min(rv);
        }
    }
    let mut slot = vec![usize::MAX; total];
    let mut components: Vec<Component> = Vec::new();
    let mut root_of = vec![0usize; total];
    for (v, root) in root_of.iter_mut().enumerate() {
        let r = find(&mut parent, v);
        *root = r;
        if slot[r] == usize::MAX {
            slot[r] = components.len();
            components.push(Component { vertices: 0, edges: 0, is_tree: false });
        }
        components[slot[r]].vertices += 1;
    }
    for e in &g.edges {
        components[slot[root_of[e.lower as usize]]].edges += 1;
    }
    for c in &mut components {
        c.is_tree = c.edges + 1 == c.vertices;
    }
    ComponentReport {
        n: g.ground.n(),
        lower_rank: g.lower_rank(),
        upper_rank: g.upper_rank,
        count: components.len(),
        all_trees: components.iter().all(|c| c.is_tree),
        components,
    }
}

/// Number of edges of the level graph with upper rank `k`: `(2k - n) binom(n, k)`.
pub fn level_edge_count(n: u32, k: u32) -> u64 {
    (2 * k - n) as u64 * binomial(n, k)
}

/// Largest `n` for which [`check_order`] also walks every maximal cover chain.
pub const LIFT_CHECK_MAX_N: u32 = 10;

#[derive(Clone, Debug, Default, Serialize)]
pub struct OrderReport {
    pub n: u32,
    pub q_size: u64,
    /// `p` maps `Q` bijectively onto `[n]^(<= n/2)` with `|x| + |p(x)| = n`.
    pub mirror_violations: u64,
    /// Pairs where `<` and the transitive closure of the covers disagree,
    /// plus any `x < x` or `y < x` without `y ⊊ x`.
    pub order_violations: u64,
    /// Cover pairs seen from one side only, or wrong down-degrees.
    pub cover_violations: u64,
    /// Maximal cover chains `C` walked, when `n` is small enough.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximal_chains: Option<u64>,
    /// Chains whose `C ∪ p(C)` is not a rank-symmetric chain under inclusion.
    pub lift_violations: u64,
    pub holds: bool,
}

/// Exhaustive consistency check of `p`, `<` and the cover relations on `Q`.
pub fn check_order(ground: GroundSet) -> OrderReport {
    let n = ground.n();
    let q: Vec<u64> = (ground.q_bottom_rank()..=n)
        .flat_map(|k| ground.level(k).map(|s| s.mask()))
        .collect();
    let mut image = std::collections::HashSet::with_capacity(q.len());
    let mut mirror_violations = 0u64;
    for &x in &q {
        let px = mirror_mask(n, x);
        if px & !x != 0 || px.count_ones() + x.count_ones() != n || !image.insert(px) {
            mirror_violations += 1;
        }
    }
    let lower_half: u64 = (0..=n / 2).map(|k| binomial(n, k)).sum();
    if image.len() as u64 != lower_half {
        mirror_violations += 1;
    }

    let (order_violations, cover_violations) = q
        .par_iter()
        .map(|&x| order_at(ground, x))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let mut report = OrderReport {
        n,
        q_size: q.len() as u64,
        mirror_violations,
        order_violations,
        cover_violations,
        ..OrderReport::default()
    };
    if n <= LIFT_CHECK_MAX_N {
        let (chains, bad) = walk_maximal_chains(ground);
        report.maximal_chains = Some(chains);
        report.lift_violations = bad;
    }
    report.holds = report.mirror_violations == 0
        && report.order_violations == 0
        && report.cover_violations == 0
        && report.lift_violations == 0;
    report
}

fn order_at(ground: GroundSet, x: u64) -> (u64, u64) {
    let n = ground.n();
    let px = mirror_mask(n, x);
    let mut order_bad = 0u64;
    let mut cover_bad = 0u64;
    let k = x.count_ones();

    let stars = circular_star_mask(n, x);
    let expected_degree = if ground.rank_in_q(k.saturating_sub(1)) && k > 0 { 2 * k - n } else { 0 };
    let downs: Vec<u64> = if expected_degree > 0 { bits(stars).map(|i| x & !(1 << i)).collect() } else { Vec::new() };
    if downs.len() as u32 != expected_degree {
        cover_bad += 1;
    }
    for &y in &downs {
        if maximal_closers(n, y) & (x & !y) == 0 {
            cover_bad += 1;
        }
    }
    for i in bits(maximal_closers(n, x)) {
        let z = x | 1 << i;
        if circular_star_mask(n, z) >> i & 1 == 0 {
            cover_bad += 1;
        }
    }

    // down-set through covers
    let mut reach = std::collections::HashSet::new();
    let mut stack = downs;
    while let Some(y) = stack.pop() {
        if reach.insert(y) {
            let yk = y.count_ones();
            if yk > 0 && ground.rank_in_q(yk - 1) {
                stack.extend(bits(circular_star_mask(n, y)).map(|i| y & !(1 << i)));
            }
        }
    }
    // down-set by definition, over all y ⊆ x in Q
    let mut sub = x;
    let mut below = 0usize;
    loop {
        if ground.rank_in_q(sub.count_ones()) {
            let is_less = less_masks(sub, mirror_mask(n, sub), x, px);
            if sub == x && is_less {
                order_bad += 1;
            }
            if is_less {
                below += 1;
            }
            if is_less != reach.contains(&sub) {
                order_bad += 1;
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & x;
    }
    if below != reach.len() {
        order_bad += 1;
    }
    (order_bad, cover_bad)
}

fn walk_maximal_chains(ground: GroundSet) -> (u64, u64) {
    let n = ground.n();
    let mut chains = 0u64;
    let mut bad = 0u64;
    let mut path = Vec::new();
    fn go(n: u32, x: u64, path: &mut Vec<u64>, chains: &mut u64, bad: &mut u64) {
        path.push(x);
        let ups = maximal_closers(n, x);
        if ups == 0 {
            *chains += 1;
            if !lift_is_rank_symmetric(n, path) {
                *bad += 1;
            }
        } else {
            for i in bits(ups) {
                go(n, x | 1 << i, path, chains, bad);
            }
        }
        path.pop();
    }
    for x in ground.level(ground.q_bottom_rank()) {
        go(n, x.mask(), &mut path, &mut chains, &mut bad);
    }
    (chains, bad)
}

fn lift_is_rank_symmetric(n: u32, path: &[u64]) -> bool {
    let mut all: Vec<u64> = path.to_vec();
    all.extend(path.iter().map(|&x| mirror_mask(n, x)));
    all.sort_by_key(|&m| (m.count_ones(), m));
    all.dedup();
    let ranks: Vec<u32> = all.iter().map(|m| m.count_ones()).collect();
    let k = ranks.len();
    all.windows(2).all(|w| w[0] != w[1] && w[0] & !w[1] == 0)
        && (0..k).all(|i| ranks[i] + ranks[k - 1 - i] == n)
}
