//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's decision procedures; graphs are rebuilt as plain adjacency
//! data and every answer comes from exhaustive search or direct arithmetic.

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use num_rational::Ratio;
use num_traits::Zero;

use std::collections::BTreeSet;

use plumbing::birational::{blow_up, Construction, Locus, Move};
use plumbing::canonical::canonical_form;
use plumbing::nlf::{Factorization, Orbit, PageShape, VanishingCycle};
use plumbing::VertexId;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use proptest::prelude::*;
use rand::Rng;
use plumbing::io::parse_graph;
use plumbing::PlumbingGraph;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_graph(name: &str) -> PlumbingGraph {
    parse_graph(&fixture(&format!("{name}.graph"))).unwrap()
}

/// Intersection matrix rebuilt from framings and edges.
pub fn matrix(g: &PlumbingGraph) -> Vec<Vec<i64>> {
    let n = g.len();
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        m[i][i] = g.framing(i);
    }
    for (i, j) in g.edges() {
        m[i][j] = 1;
        m[j][i] = 1;
    }
    m
}

/// Bareiss elimination with row pivoting, exact in i128 for the sizes used here.
pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a[i][k] != 0) else {
            return 0;
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

/// Sylvester: `−m` has all leading principal minors positive.
pub fn negative_definite(m: &[Vec<i64>]) -> bool {
    (1..=m.len()).all(|k| {
        let minor: Vec<Vec<i64>> = m[..k].iter().map(|r| r[..k].iter().map(|x| -x).collect()).collect();
        det(&minor) > 0
    })
}

/// Every connected tree on `1..=max_n` vertices with framings in
/// `lo..=hi`, one per isomorphism class, negative definite only.
pub fn corpus(max_n: usize, lo: i64, hi: i64) -> Vec<PlumbingGraph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        // tree shapes as parent arrays (vertex i hangs off some j < i), deduplicated
        let mut all = Vec::new();
        parent_arrays(&mut vec![0; n], 1, &mut all);
        let mut shapes: Vec<Vec<usize>> = Vec::new();
        let mut seen_shapes = HashSet::new();
        for parents in all {
            if seen_shapes.insert(canonical_form(&build(&parents, &vec![0; n])).unwrap()) {
                shapes.push(parents);
            }
        }
        let mut seen = HashSet::new();
        for shape in &shapes {
            let mut f = vec![lo; n];
            loop {
                let g = build(shape, &f);
                if negative_definite(&matrix(&g)) && seen.insert(canonical_form(&g).unwrap()) {
                    out.push(g);
                }
                let Some(k) = (0..n).rev().find(|&k| f[k] < hi) else {
                    break;
                };
                f[k] += 1;
                for x in f.iter_mut().skip(k + 1) {
                    *x = lo;
                }
            }
        }
    }
    out
}

fn parent_arrays(p: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i >= p.len() {
        out.push(p.clone());
        return;
    }
    for j in 0..i {
        p[i] = j;
        parent_arrays(p, i + 1, out);
    }
}

pub fn build(parents: &[usize], framings: &[i64]) -> PlumbingGraph {
    let mut g = PlumbingGraph::new();
    for (i, &f) in framings.iter().enumerate() {
        g.add_vertex(format!("v{i}").as_str(), f).unwrap();
    }
    for i in 1..parents.len() {
        g.add_edge_idx(parents[i], i).unwrap();
    }
    g
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Goal {
    Empty,
    ZeroVertex,
}

/// Plain labeled graph for the blowdown oracle, at most 64 vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Small {
    pub framing: Vec<i64>,
    pub adj: Vec<u64>,
    pub alive: u64,
}

impl Small {
    pub fn from_graph(g: &PlumbingGraph) -> Self {
        let n = g.len();
        assert!(n <= 64);
        let mut adj = vec![0u64; n];
        for (i, j) in g.edges() {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        Small {
            framing: (0..n).map(|i| g.framing(i)).collect(),
            adj,
            alive: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        }
    }

    pub fn add_leaf(&mut self, at: usize) {
        let k = self.framing.len();
        assert!(k < 64);
        self.framing.push(-1);
        self.adj.push(1 << at);
        self.adj[at] |= 1 << k;
        self.alive |= 1 << k;
    }

    fn is_alive(&self, v: usize) -> bool {
        self.alive >> v & 1 == 1
    }

    fn blowable(&self, v: usize) -> bool {
        if !self.is_alive(v) || self.framing[v] != -1 || self.adj[v].count_ones() > 2 {
            return false;
        }
        let mut nb = self.neighbors(v);
        match (nb.next(), nb.next()) {
            (Some(a), Some(b)) => self.adj[a] >> b & 1 == 0,
            _ => true,
        }
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        bits(self.adj[v])
    }

    /// `u < v` with the same framing and neighbors: swapping them is an
    /// automorphism, so only the first of a twin class needs trying.
    fn has_earlier_twin(&self, v: usize) -> bool {
        bits(self.alive & ((1u64 << v) - 1)).any(|u| self.framing[u] == self.framing[v] && self.adj[u] == self.adj[v])
    }

    fn blow_down(&self, v: usize) -> Small {
        let mut s = self.clone();
        let nb: Vec<usize> = s.neighbors(v).collect();
        for &u in &nb {
            s.adj[u] &= !(1 << v);
            s.framing[u] += 1;
        }
        if let [a, b] = nb[..] {
            s.adj[a] |= 1 << b;
            s.adj[b] |= 1 << a;
        }
        s.adj[v] = 0;
        s.framing[v] = 0;
        s.alive &= !(1 << v);
        s
    }

    fn live(&self) -> impl Iterator<Item = usize> {
        bits(self.alive)
    }

    fn reached(&self, goal: Goal) -> bool {
        match goal {
            Goal::Empty => self.alive == 0,
            Goal::ZeroVertex => {
                self.alive.count_ones() == 1 && self.framing[self.alive.trailing_zeros() as usize] == 0
            }
        }
    }

    /// Removing an edge at `v` always blows down one of its ends, so every
    /// current neighbor but the last two raises `v` before `v` can go, and
    /// the surviving 0-vertex is raised by all of them.
    fn hopeless(&self, goal: Goal) -> bool {
        let slack = |i: usize| self.framing[i] + self.adj[i].count_ones() as i64;
        let stuck = |i: usize| self.framing[i] >= 0 || slack(i) > 1;
        match goal {
            Goal::Empty => self.live().any(stuck),
            Goal::ZeroVertex => {
                self.alive == 0
                    || self.live().filter(|&i| stuck(i)).count() > 1
                    || self.live().any(|i| self.framing[i] > 0)
                    || !self.live().any(|i| slack(i) <= 0)
            }
        }
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            i
        })
    })
}

/// Tries every blowdown order up to twin symmetry, remembering dead states
/// exactly.
pub fn blows_down_to(s: &Small, goal: Goal) -> bool {
    fn go(s: &Small, goal: Goal, dead: &mut HashSet<Small>) -> bool {
        if s.reached(goal) {
            return true;
        }
        if s.hopeless(goal) || dead.contains(s) {
            return false;
        }
        for v in s.live() {
            if s.blowable(v) && !s.has_earlier_twin(v) && go(&s.blow_down(v), goal, dead) {
                return true;
            }
        }
        dead.insert(s.clone());
        false
    }
    go(s, goal, &mut HashSet::new())
}

/// Whether some choice of (−1)-leaves makes the graph blow down to `goal`.
/// A vertex can absorb at most `−1 − f` leaves (`−f` for the 0-vertex goal):
/// each leaf must be blown down before its host and raises it by one, and a
/// leaf outliving its host is stuck at framing 0.
///
/// Splitting off a (−1)-leaf leaves its host raised by one, so the augmented
/// form is `⟨−1⟩^L ⊕ (Q + diag k)`. Blowdowns keep the signature and the
/// nullity, hence `Q + diag k` must be negative definite and unimodular for
/// the empty goal and negative semidefinite of nullity one for the 0-vertex.
/// Raising entries of `k` only raises eigenvalues, so a partial assignment
/// that already fails definiteness can be cut.
pub fn augmentation_oracle(g: &PlumbingGraph, goal: Goal) -> bool {
    let n = g.len();
    let cap: Vec<i64> = (0..n)
        .map(|i| match goal {
            Goal::Empty => -1 - g.framing(i),
            Goal::ZeroVertex => -g.framing(i),
        })
        .collect();
    if cap.iter().any(|&c| c < 0) {
        return false;
    }
    let mut m = matrix(g);
    search(g, goal, &cap, &mut m, 0)
}

fn still_possible(m: &[Vec<i64>], goal: Goal) -> bool {
    match goal {
        Goal::Empty => negative_definite(m),
        Goal::ZeroVertex => negative_semidefinite(m),
    }
}

fn search(g: &PlumbingGraph, goal: Goal, cap: &[i64], m: &mut Vec<Vec<i64>>, v: usize) -> bool {
    let n = m.len();
    if v == n {
        let ok = match goal {
            Goal::Empty => det(m).abs() == 1,
            Goal::ZeroVertex => det(m) == 0 && (0..n).any(|i| negative_definite(&delete(m, i))),
        };
        if !ok {
            return false;
        }
        let mut s = Small::from_graph(g);
        for i in 0..n {
            for _ in 0..m[i][i] - g.framing(i) {
                s.add_leaf(i);
            }
        }
        return blows_down_to(&s, goal);
    }
    let f = m[v][v];
    let mut found = false;
    if v + 1 == n {
        // the determinant is affine in the last diagonal entry, so only the
        // counts hitting the target determinant need a closer look
        let d0 = det(m);
        m[v][v] = f + 1;
        let slope = det(m) - d0;
        let targets: &[i128] = match goal {
            Goal::Empty => &[1, -1],
            Goal::ZeroVertex => &[0],
        };
        for c in 0..=cap[v] {
            let d = d0 + slope * c as i128;
            if !targets.contains(&d) {
                continue;
            }
            m[v][v] = f + c;
            if still_possible(m, goal) && search(g, goal, cap, m, v + 1) {
                found = true;
                break;
            }
        }
        m[v][v] = f;
        return found;
    }
    for c in 0..=cap[v] {
        m[v][v] = f + c;
        if !still_possible(m, goal) {
            break;
        }
        if search(g, goal, cap, m, v + 1) {
            found = true;
            break;
        }
    }
    m[v][v] = f;
    found
}

fn delete(m: &[Vec<i64>], v: usize) -> Vec<Vec<i64>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != v)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != v).map(|(_, &x)| x).collect())
        .collect()
}

/// Symmetric elimination on `−m` over the rationals: a negative pivot, or a
/// zero pivot with a nonzero row, rules out semidefiniteness.
pub fn negative_semidefinite(m: &[Vec<i64>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<Ratio<i128>>> =
        m.iter().map(|r| r.iter().map(|&x| Ratio::from_integer(-(x as i128))).collect()).collect();
    for k in 0..n {
        let p = a[k][k];
        if p < Ratio::zero() {
            return false;
        }
        if p.is_zero() {
            if a[k][k + 1..].iter().any(|x| !x.is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k + 1..n {
                let t = f * a[k][j];
                a[i][j] -= t;
            }
        }
    }
    true
}

pub fn sandwich_oracle(g: &PlumbingGraph) -> bool {
    augmentation_oracle(g, Goal::Empty)
}

pub fn pm_oracle(g: &PlumbingGraph) -> bool {
    augmentation_oracle(g, Goal::ZeroVertex)
}

/// A random construction from a seed of framing `seed_framing` (at most ten
/// blowups) and a keep-set obtained by dropping some (−1)-leaves.
pub fn random_construction(rng: &mut StdRng, seed_framing: i64) -> (Construction, Vec<VertexId>) {
    let len = rng.gen_range(0..=10);
    let mut g = PlumbingGraph::new();
    g.add_vertex("s0", seed_framing).unwrap();
    let mut moves = Vec::new();
    for _ in 0..len {
        let edges = g.edges();
        let locus = if !edges.is_empty() && rng.gen_bool(0.5) {
            let (i, j) = edges[rng.gen_range(0..edges.len())];
            Locus::Edge(g.id(i).clone(), g.id(j).clone())
        } else {
            Locus::Vertex(g.id(rng.gen_range(0..g.len())).clone())
        };
        let (h, created) = blow_up(&g, &locus).unwrap();
        moves.push(match locus {
            Locus::Vertex(v) => Move::blow_up_vertex(v).creating(created),
            Locus::Edge(a, b) => Move::blow_up_edge(a, b).creating(created),
        });
        g = h;
    }
    let mut dropped = BTreeSet::new();
    for i in 0..g.len() {
        let leaf = g.framing(i) == -1 && g.degree(i) == 1;
        let host_kept = leaf && !dropped.contains(&g.neighbors(i)[0]);
        if host_kept && g.len() - dropped.len() > 1 && rng.gen_bool(0.5) {
            dropped.insert(i);
        }
    }
    let keep = (0..g.len()).filter(|i| !dropped.contains(i)).map(|i| g.id(i).clone()).collect();
    (Construction::new("s0", seed_framing, moves), keep)
}

pub fn random_pm_setup(rng: &mut StdRng) -> (Construction, Vec<VertexId>) {
    random_construction(rng, 0)
}

/// An admissible factorization with at most 8 holes and 8 cycles.
pub fn random_factorization(rng: &mut StdRng) -> Factorization {
    let page = if rng.gen_bool(0.5) { PageShape::Disk } else { PageShape::Sphere };
    let n = rng.gen_range(1..=8);
    let holes: Vec<String> = (1..=n).map(|i| format!("h{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut orbits = Vec::new();
    let mut interchanges = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = rng.gen_range(1..=rest.len());
        let (o, r) = rest.split_at(size);
        for k in 1..o.len() {
            interchanges.push((o[rng.gen_range(0..k)], o[k]));
        }
        orbits.push(Orbit { id: format!("o{}", orbits.len()), holes: o.to_vec() });
        rest = r;
    }
    let mut cycles = Vec::new();
    let max_cycles = if page == PageShape::Sphere && n == 1 { 0 } else { rng.gen_range(0..=8) };
    while cycles.len() < max_cycles {
        let enc: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        let proper = page == PageShape::Disk || enc.len() < n;
        if !enc.is_empty() && proper {
            cycles.push(VanishingCycle { id: format!("a{}", cycles.len()), encloses: enc });
        }
    }
    Factorization::new(page, holes, orbits, cycles, interchanges).unwrap()
}

/// Random trees on `1..=max_n` vertices with framings in `lo..=hi`; vertex
/// `i` hangs off a uniformly chosen earlier vertex.
pub fn trees(max_n: usize, lo: i64, hi: i64) -> impl Strategy<Value = PlumbingGraph> {
    prop::collection::vec((any::<prop::sample::Index>(), lo..=hi), 1..=max_n).prop_map(|parts| {
        let parents: Vec<usize> =
            parts.iter().enumerate().map(|(i, (p, _))| if i == 0 { 0 } else { p.index(i) }).collect();
        let framings: Vec<i64> = parts.iter().map(|&(_, f)| f).collect();
        build(&parents, &framings)
    })
}

pub fn negative_definite_trees(max_n: usize, lo: i64, hi: i64) -> impl Strategy<Value = PlumbingGraph> {
    trees(max_n, lo, hi).prop_filter("negative definite", |g| negative_definite(&matrix(g)))
}

/// Same ids, framings and edges, ignoring vertex order.
pub fn same_labeled(a: &PlumbingGraph, b: &PlumbingGraph) -> bool {
    let label = |g: &PlumbingGraph| {
        let vs: BTreeSet<(VertexId, i64)> = g.vertices().iter().map(|v| (v.id.clone(), v.framing)).collect();
        let es: BTreeSet<(VertexId, VertexId)> = g
            .edges()
            .into_iter()
            .map(|(i, j)| {
                let (x, y) = (g.id(i).clone(), g.id(j).clone());
                if x < y { (x, y) } else { (y, x) }
            })
            .collect();
        (vs, es)
    };
    label(a) == label(b)
}
