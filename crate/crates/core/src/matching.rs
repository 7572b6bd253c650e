//! Bipartite graphs, maximum matching and integral max-flow.

use std::collections::VecDeque;

use serde::Serialize;

const NIL: u32 = u32::MAX;

/// Bipartite graph `G = (A, B, E)` with vertices `0..a` and `0..b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteGraph {
    pub a: usize,
    pub b: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(a: usize, b: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(u, v)| u < a && v < b));
        BipartiteGraph { a, b, edges }
    }

    pub fn complete(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (0..b).map(move |v| (u, v))).collect();
        BipartiteGraph { a, b, edges }
    }

    /// Swap the roles of the two sides.
    pub fn transpose(&self) -> Self {
        BipartiteGraph {
            a: self.b,
            b: self.a,
            edges: self.edges.iter().map(|&(u, v)| (v, u)).collect(),
        }
    }

    pub fn adjacency_a(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.a];
        for &(u, v) in &self.edges {
            adj[u].push(v as u32);
        }
        adj
    }

    pub fn degree_a(&self) -> Vec<usize> {
        let mut d = vec![0; self.a];
        for &(u, _) in &self.edges {
            d[u] += 1;
        }
        d
    }

    pub fn degree_b(&self) -> Vec<usize> {
        let mut d = vec![0; self.b];
        for &(_, v) in &self.edges {
            d[v] += 1;
        }
        d
    }
}

/// Hopcroft–Karp over a left-to-right adjacency list.
///
/// Left vertices can be switched on in stages; augmenting paths never
/// unmatch a vertex, so anything saturated in an earlier stage stays
/// saturated.
pub struct HopcroftKarp<'a> {
    adj: &'a [Vec<u32>],
    mate_left: Vec<u32>,
    mate_right: Vec<u32>,
    dist: Vec<u32>,
    active: Vec<bool>,
}

impl<'a> HopcroftKarp<'a> {
    pub fn new(adj: &'a [Vec<u32>], right: usize) -> Self {
        HopcroftKarp {
            adj,
            mate_left: vec![NIL; adj.len()],
            mate_right: vec![NIL; right],
            dist: vec![0; adj.len()],
            active: vec![false; adj.len()],
        }
    }

    pub fn activate(&mut self, u: usize) {
        self.active[u] = true;
    }

    pub fn activate_all(&mut self) {
        self.active.iter_mut().for_each(|a| *a = true);
    }

    pub fn mate_of_left(&self, u: usize) -> Option<usize> {
        let m = self.mate_left[u];
        (m != NIL).then_some(m as usize)
    }

    pub fn mate_of_right(&self, v: usize) -> Option<usize> {
        let m = self.mate_right[v];
        (m != NIL).then_some(m as usize)
    }

    pub fn size(&self) -> usize {
        self.mate_left.iter().filter(|&&m| m != NIL).count()
    }

    /// Grow the matching to maximum over the active left vertices.
    pub fn run(&mut self) -> usize {
        let n = self.adj.len();
        let mut iter = vec![0usize; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut via: Vec<u32> = Vec::new();
        while self.bfs() {
            iter.iter_mut().for_each(|i| *i = 0);
            for u in 0..n {
                if self.active[u] && self.mate_left[u] == NIL {
                    self.dfs(u as u32, &mut iter, &mut stack, &mut via);
                }
            }
        }
        self.size()
    }

    fn bfs(&mut self) -> bool {
        let mut queue = VecDeque::new();
        for u in 0..self.adj.len() {
            if self.active[u] && self.mate_left[u] == NIL {
                self.dist[u] = 0;
                queue.push_back(u as u32);
            } else {
                self.dist[u] = NIL;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u as usize] {
                let w = self.mate_right[v as usize];
                if w == NIL {
                    found = true;
                } else if self.dist[w as usize] == NIL {
                    self.dist[w as usize] = self.dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    }

    fn dfs(&mut self, root: u32, iter: &mut [usize], stack: &mut Vec<u32>, via: &mut Vec<u32>) {
        stack.clear();
        via.clear();
        stack.push(root);
        while let Some(&u) = stack.last() {
            let ui = u as usize;
            if iter[ui] < self.adj[ui].len() {
                let v = self.adj[ui][iter[ui]];
                iter[ui] += 1;
                let w = self.mate_right[v as usize];
                if w == NIL {
                    via.push(v);
                    for (&l, &r) in stack.iter().zip(via.iter()) {
                        self.mate_left[l as usize] = r;
                        self.mate_right[r as usize] = l;
                    }
                    return;
                }
                if self.dist[w as usize] == self.dist[ui] + 1 {
                    via.push(v);
                    stack.push(w);
                }
            } else {
                self.dist[ui] = NIL;
                stack.pop();
                via.pop();
            }
        }
    }
}

/// Maximum matching of a bipartite graph; returns `mate[a] = Some(b)`.
pub fn maximum_matching(g: &BipartiteGraph) -> Vec<Option<usize>> {
    let adj = g.adjacency_a();
    let mut hk = HopcroftKarp::new(&adj, g.b);
    hk.activate_all();
    hk.run();
    (0..g.a).map(|u| hk.mate_of_left(u)).collect()
}

/// Dinic max-flow on integer capacities.
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Adds `u -> v` with capacity `c`; returns the arc id.
    pub fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    /// Flow currently carried by arc `id` (the reverse arc's residual).
    pub fn flow(&self, id: usize) -> i64 {
        self.cap[id ^ 1]
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Vertices reachable from `s` in the residual graph.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    // Recursion depth is bounded by the BFS layer count, which is tiny for
    // the three-layer networks built in this crate.
    fn dfs(&mut self, u: usize, t: usize, limit: i64) -> i64 {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, limit.min(self.cap[e]));
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }
}
