//! Backtracking search for s- and p-embeddings.
//!
//! Vertices are assigned in breadth-first order from a center. Basis indices are
//! interchangeable, so indices with the same occurrence pattern so far are
//! treated as one class and fresh indices are allocated in first-use order.
//! Each placement is checked against the Gram matrix of earlier vertices and
//! against every connected subtree it completes.

use std::collections::BTreeMap;

use crate::embedding::subsets::for_each_connected_subset;
use crate::embedding::{Embedding, Image, Mode, SUBSET_CAP};
use crate::graph::PlumbingGraph;
use crate::lattice::{classify_definiteness, intersection_matrix};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Largest basis allowed; defaults to Σ(−framing), which no embedding
    /// can exceed since every index occurs at least once.
    pub basis_budget: Option<usize>,
    /// Cap on precomputed connected subtrees.
    pub subset_cap: usize,
    /// Cap on placement attempts.
    pub node_limit: Option<u64>,
    /// S mode only: place this vertex first and keep its positive index out
    /// of every other image, so it holds the type-1 element.
    pub pinned: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            basis_budget: None,
            subset_cap: SUBSET_CAP,
            node_limit: None,
            pinned: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(Embedding),
    Absent,
    BudgetExceeded(String),
}

/// Finds an embedding, `Ok(None)` when none exists and
/// `Err(BudgetExceeded)` when the limits prevented a full search.
pub fn find_embedding(g: &PlumbingGraph, mode: Mode, basis_budget: Option<usize>) -> Result<Option<Embedding>> {
    let opts = SearchOptions {
        basis_budget,
        ..SearchOptions::default()
    };
    match find_embedding_with(g, mode, &opts)? {
        SearchResult::Found(e) => Ok(Some(e)),
        SearchResult::Absent => Ok(None),
        SearchResult::BudgetExceeded(why) => Err(Error::BudgetExceeded(why)),
    }
}

pub fn find_embedding_with(g: &PlumbingGraph, mode: Mode, opts: &SearchOptions) -> Result<SearchResult> {
    g.require_tree()?;
    if !classify_definiteness(&intersection_matrix(g)).is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    if g.is_empty() {
        return Ok(SearchResult::Found(Embedding {
            mode,
            basis_size: 0,
            images: Vec::new(),
        }));
    }
    if g.len() > 64 {
        return Ok(SearchResult::BudgetExceeded("more than 64 vertices".into()));
    }
    let default_budget: i64 = g.framings().iter().map(|f| -f).sum();
    let default_budget = default_budget.max(0) as usize;
    let budget = opts.basis_budget.unwrap_or(default_budget);
    let pinned = if mode == Mode::S { opts.pinned } else { None };
    let root = pinned.or_else(|| g.center()).unwrap();
    let (order, parent) = g.bfs(root);
    let n = g.len();
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();
    let mut subsets = Vec::with_capacity(n);
    let mut prefix = 0u64;
    let mut total = 0usize;
    for &v in &order {
        prefix |= 1 << v;
        let mut here = Vec::new();
        let done = for_each_connected_subset(&adj, v, prefix, opts.subset_cap - total, |m| {
            here.push(m);
            true
        });
        match done {
            Some(c) => total += c,
            None => {
                return Ok(SearchResult::BudgetExceeded(format!(
                    "more than {} connected subtrees",
                    opts.subset_cap
                )))
            }
        }
        // the singleton is already covered by the self-pairing
        here.retain(|&m| m.count_ones() > 1);
        subsets.push(here);
    }
    let mut s = Search {
        mode,
        framing: g.framings(),
        order,
        parent,
        subsets,
        budget,
        pinned: pinned.is_some(),
        plus: vec![None; n],
        minus: vec![Vec::new(); n],
        idx_plus: vec![None; budget],
        idx_minus: vec![Vec::new(); budget],
        n_idx: 0,
        pure_neg: None,
        budget_hit: false,
        nodes: 0,
        node_limit: opts.node_limit,
        aborted: false,
        coeff: vec![0; budget],
    };
    if s.place(0) {
        let images = (0..n)
            .map(|v| {
                (
                    g.id(v).clone(),
                    Image::with_negatives(s.plus[v], s.minus[v].iter().copied()),
                )
            })
            .collect();
        return Ok(SearchResult::Found(Embedding {
            mode,
            basis_size: s.n_idx,
            images,
        }));
    }
    if s.aborted {
        return Ok(SearchResult::BudgetExceeded(format!(
            "node limit {} reached",
            opts.node_limit.unwrap_or(0)
        )));
    }
    if s.budget_hit && budget < default_budget {
        return Ok(SearchResult::BudgetExceeded(format!(
            "basis budget {budget} below the proven bound {default_budget}"
        )));
    }
    Ok(SearchResult::Absent)
}

struct Search {
    mode: Mode,
    framing: Vec<i64>,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    subsets: Vec<Vec<u64>>,
    budget: usize,
    pinned: bool,
    plus: Vec<Option<usize>>,
    minus: Vec<Vec<usize>>,
    idx_plus: Vec<Option<usize>>,
    idx_minus: Vec<Vec<usize>>,
    n_idx: usize,
    pure_neg: Option<usize>,
    budget_hit: bool,
    nodes: u64,
    node_limit: Option<u64>,
    aborted: bool,
    coeff: Vec<i32>,
}

/// Existing indices with one occurrence pattern; choosing any `t` of them is
/// equivalent to choosing the first `t`.
struct Group {
    members: Vec<usize>,
    /// Earlier vertices whose pairing with the new vertex changes per member.
    effect: Vec<(usize, i64)>,
}

impl Search {
    fn place(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l) {
            self.aborted = true;
            return false;
        }
        let v = self.order[k];
        let f = self.framing[v];
        let mut options: Vec<Option<usize>> = Vec::new();
        if !(self.pinned && k == 0) {
            let mut seen = BTreeMap::new();
            for i in 0..self.n_idx {
                if self.idx_plus[i].is_none() {
                    seen.entry(self.idx_minus[i].clone()).or_insert(i);
                }
            }
            options.extend(seen.into_values().map(Some));
        }
        const FRESH: usize = usize::MAX;
        if self.n_idx < self.budget {
            options.push(Some(FRESH));
        } else {
            self.budget_hit = true;
        }
        if self.mode == Mode::P && self.pure_neg.is_none() {
            options.push(None);
        }
        for opt in options {
            let p = match opt {
                Some(FRESH) => Some(self.n_idx),
                other => other,
            };
            let fresh_plus = opt == Some(FRESH);
            let m = -f - p.is_some() as i64;
            if m < 0 {
                continue;
            }
            if fresh_plus {
                self.n_idx += 1;
            }
            if self.try_negatives(k, v, p, m as usize) {
                return true;
            }
            if fresh_plus {
                self.n_idx -= 1;
            }
            if self.aborted {
                return false;
            }
        }
        false
    }

    fn try_negatives(&mut self, k: usize, v: usize, p: Option<usize>, m: usize) -> bool {
        let n = self.framing.len();
        let mut cur = vec![0i64; n];
        let mut target = vec![0i64; n];
        if let Some(par) = self.parent[v] {
            target[par] = 1;
        }
        if let Some(p) = p {
            if p < self.n_idx {
                for &w in &self.idx_minus[p] {
                    cur[w] += 1;
                }
            }
        }
        let forbidden_with: Option<&Vec<usize>> = self.parent[v].map(|par| &self.minus[par]);
        let mut by_sig: BTreeMap<(Option<usize>, Vec<usize>), Vec<usize>> = BTreeMap::new();
        for i in 0..self.n_idx {
            if Some(i) == p || self.idx_minus[i].len() >= 2 {
                continue;
            }
            if self.pinned && i == 0 {
                continue;
            }
            if self.idx_plus[i].is_none() && self.idx_minus[i].is_empty() {
                continue;
            }
            // adjacent images share no negative index
            if forbidden_with.is_some_and(|fw| fw.contains(&i)) {
                continue;
            }
            by_sig
                .entry((self.idx_plus[i], self.idx_minus[i].clone()))
                .or_default()
                .push(i);
        }
        let groups: Vec<Group> = by_sig
            .into_iter()
            .map(|((owner, minus), members)| {
                let mut effect: Vec<(usize, i64)> = minus.iter().map(|&w| (w, -1)).collect();
                if let Some(o) = owner {
                    effect.push((o, 1));
                }
                Group { members, effect }
            })
            .collect();
        let mut last = vec![usize::MAX; n];
        for (gi, g) in groups.iter().enumerate() {
            for &(w, _) in &g.effect {
                last[w] = gi;
            }
        }
        for pos in 0..k {
            let w = self.order[pos];
            if last[w] == usize::MAX && cur[w] != target[w] {
                return false;
            }
        }
        let fresh_avail = self.budget - self.n_idx;
        let mut suffix = vec![0usize; groups.len() + 1];
        for gi in (0..groups.len()).rev() {
            suffix[gi] = suffix[gi + 1] + groups[gi].members.len();
        }
        let mut chosen = Vec::new();
        let ctx = Ctx {
            k,
            v,
            p,
            m,
            groups: &groups,
            last: &last,
            target: &target,
            suffix: &suffix,
            fresh_avail,
        };
        self.choose(&ctx, 0, &mut cur, &mut chosen)
    }

    fn choose(&mut self, ctx: &Ctx, gi: usize, cur: &mut [i64], chosen: &mut Vec<usize>) -> bool {
        if chosen.len() + ctx.suffix[gi] + ctx.fresh_avail < ctx.m {
            self.budget_hit = true;
            return false;
        }
        if gi == ctx.groups.len() {
            let fresh = ctx.m - chosen.len();
            return self.commit(ctx, chosen, fresh);
        }
        let g = &ctx.groups[gi];
        let max_t = g.members.len().min(ctx.m - chosen.len());
        for t in 0..=max_t {
            if t > 0 {
                chosen.push(g.members[t - 1]);
                for &(w, d) in &g.effect {
                    cur[w] += d;
                }
            }
            let ok = g
                .effect
                .iter()
                .all(|&(w, _)| ctx.last[w] != gi || cur[w] == ctx.target[w]);
            if ok && self.choose(ctx, gi + 1, cur, chosen) {
                return true;
            }
            if self.aborted {
                return false;
            }
        }
        for _ in 0..max_t {
            chosen.pop();
        }
        for &(w, d) in &g.effect {
            cur[w] -= d * max_t as i64;
        }
        false
    }

    fn commit(&mut self, ctx: &Ctx, chosen: &[usize], fresh: usize) -> bool {
        let v = ctx.v;
        let base = self.n_idx;
        let mut neg: Vec<usize> = chosen.to_vec();
        neg.extend(base..base + fresh);
        self.n_idx += fresh;
        self.plus[v] = ctx.p;
        if let Some(p) = ctx.p {
            self.idx_plus[p] = Some(v);
        } else {
            self.pure_neg = Some(v);
        }
        for &i in &neg {
            self.idx_minus[i].push(v);
        }
        self.minus[v] = neg;
        if self.subsets_ok(ctx.k) && self.place(ctx.k + 1) {
            return true;
        }
        for &i in &self.minus[v].clone() {
            self.idx_minus[i].pop();
        }
        self.minus[v].clear();
        if let Some(p) = ctx.p {
            self.idx_plus[p] = None;
        } else {
            self.pure_neg = None;
        }
        self.plus[v] = None;
        self.n_idx -= fresh;
        false
    }

    fn subsets_ok(&mut self, k: usize) -> bool {
        let mut touched = Vec::new();
        for si in 0..self.subsets[k].len() {
            let mut mask = self.subsets[k][si];
            touched.clear();
            while mask != 0 {
                let u = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                if let Some(p) = self.plus[u] {
                    self.coeff[p] += 1;
                    touched.push(p);
                }
                for &i in &self.minus[u] {
                    self.coeff[i] -= 1;
                    touched.push(i);
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut ok = true;
            let mut plus = 0;
            for &i in &touched {
                match self.coeff[i] {
                    1 => plus += 1,
                    0 | -1 => {}
                    _ => ok = false,
                }
                self.coeff[i] = 0;
            }
            let ok = ok
                && match self.mode {
                    Mode::S => plus == 1,
                    Mode::P => plus <= 1,
                };
            if !ok {
                return false;
            }
        }
        true
    }
}

struct Ctx<'a> {
    k: usize,
    v: usize,
    p: Option<usize>,
    m: usize,
    groups: &'a [Group],
    last: &'a [usize],
    target: &'a [i64],
    suffix: &'a [usize],
    fresh_avail: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{verify_embedding, Verification};

    fn star(center: i64, leaves: &[i64]) -> PlumbingGraph {
        let mut g = PlumbingGraph::new();
        g.add_vertex("c", center).unwrap();
        for (k, &f) in leaves.iter().enumerate() {
            let id = format!("l{k}");
            g.add_vertex(id.clone(), f).unwrap();
            g.add_edge("c", id).unwrap();
        }
        g
    }

    #[test]
    fn minus_one_vertex() {
        let g = star(-1, &[]);
        let e = find_embedding(&g, Mode::S, None).unwrap().unwrap();
        assert_eq!(e.to_string(), "c : +1\n");
    }

    #[test]
    fn d4_has_p_but_not_s() {
        let g = star(-2, &[-2, -2, -2]);
        assert_eq!(find_embedding(&g, Mode::S, None).unwrap(), None);
        let e = find_embedding(&g, Mode::P, None).unwrap().unwrap();
        assert_eq!(verify_embedding(&g, &e).unwrap(), Verification::Ok);
        assert_eq!(e.images.iter().filter(|(_, im)| im.positive.is_none()).count(), 1);
    }

    #[test]
    fn small_budget_is_not_absence() {
        let g = star(-2, &[-2, -3, -2]);
        assert!(find_embedding(&g, Mode::S, None).unwrap().is_some());
        assert!(matches!(find_embedding(&g, Mode::S, Some(2)), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn pinned_root_keeps_type_one() {
        let g = star(-2, &[-2, -3, -2]);
        for v in 0..g.len() {
            let opts = SearchOptions {
                pinned: Some(v),
                ..SearchOptions::default()
            };
            if let SearchResult::Found(e) = find_embedding_with(&g, Mode::S, &opts).unwrap() {
                let p = e.image(g.id(v)).unwrap().positive.unwrap();
                assert!(e.images.iter().all(|(_, im)| !im.negatives.contains(&p)));
            }
        }
    }
}
