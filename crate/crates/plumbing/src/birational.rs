//! Blowups, blowdowns, certificate replay and blowdown search.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::canonical::canonical_form;
use crate::embedding;
use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::{classify_definiteness, intersection_matrix, DefinitenessClass};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Locus {
    Vertex(VertexId),
    Edge(VertexId, VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    BlowUpVertex(VertexId),
    BlowUpEdge(VertexId, VertexId),
    BlowDown(VertexId),
}

/// One move. Blowups may pin the id of the vertex they create; otherwise
/// the smallest free `n<k>` is used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub created: Option<VertexId>,
}

impl Move {
    pub fn blow_up_vertex(v: impl Into<VertexId>) -> Self {
        Move {
            kind: MoveKind::BlowUpVertex(v.into()),
            created: None,
        }
    }

    pub fn blow_up_edge(u: impl Into<VertexId>, w: impl Into<VertexId>) -> Self {
        Move {
            kind: MoveKind::BlowUpEdge(u.into(), w.into()),
            created: None,
        }
    }

    pub fn blow_down(v: impl Into<VertexId>) -> Self {
        Move {
            kind: MoveKind::BlowDown(v.into()),
            created: None,
        }
    }

    pub fn creating(mut self, id: impl Into<VertexId>) -> Self {
        self.created = Some(id.into());
        self
    }

    pub fn is_blowup(&self) -> bool {
        !matches!(self.kind, MoveKind::BlowDown(_))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MoveKind::BlowUpVertex(v) => write!(f, "bu_v {v}")?,
            MoveKind::BlowUpEdge(u, w) => write!(f, "bu_e {u} {w}")?,
            MoveKind::BlowDown(v) => write!(f, "bd {v}")?,
        }
        if let Some(c) = &self.created {
            write!(f, " as {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveSequence {
    pub moves: Vec<Move>,
}

impl MoveSequence {
    pub fn new(moves: Vec<Move>) -> Self {
        MoveSequence { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn replay(&self, g: &PlumbingGraph) -> Result<PlumbingGraph> {
        Ok(self.replay_states(g)?.pop().unwrap())
    }

    /// Every intermediate graph, starting with `g` itself.
    pub fn replay_states(&self, g: &PlumbingGraph) -> Result<Vec<PlumbingGraph>> {
        let mut states = vec![g.clone()];
        for (k, m) in self.moves.iter().enumerate() {
            let (next, _) = apply_move(states.last().unwrap(), m)
                .map_err(|e| Error::InvalidSequence(format!("move {} (`{m}`): {e}", k + 1)))?;
            states.push(next);
        }
        Ok(states)
    }
}

impl fmt::Display for MoveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.moves {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Blowup sequence grown from a single seed vertex. A framing 0 seed builds
/// graphs that blow down to a 0-framed vertex, a framing −1 seed builds
/// graphs that blow down to the empty graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Construction {
    pub seed: VertexId,
    pub seed_framing: i64,
    pub moves: MoveSequence,
}

impl Construction {
    pub fn new(seed: impl Into<VertexId>, seed_framing: i64, moves: Vec<Move>) -> Self {
        Construction {
            seed: seed.into(),
            seed_framing,
            moves: MoveSequence::new(moves),
        }
    }

    pub fn seed_graph(&self) -> PlumbingGraph {
        let mut g = PlumbingGraph::new();
        g.add_vertex(self.seed.clone(), self.seed_framing).unwrap();
        g
    }

    pub fn build(&self) -> Result<PlumbingGraph> {
        Ok(self.build_trace()?.0)
    }

    /// Final graph and the id created by each move.
    pub fn build_trace(&self) -> Result<(PlumbingGraph, Vec<VertexId>)> {
        let mut g = self.seed_graph();
        let mut created = Vec::new();
        for (k, m) in self.moves.moves.iter().enumerate() {
            if !m.is_blowup() {
                return Err(Error::InvalidSequence(format!(
                    "move {} (`{m}`) is not a blowup",
                    k + 1
                )));
            }
            let (next, id) = apply_move(&g, m)
                .map_err(|e| Error::InvalidSequence(format!("move {} (`{m}`): {e}", k + 1)))?;
            g = next;
            created.push(id.unwrap());
        }
        Ok((g, created))
    }

    pub fn target(&self) -> Option<Target> {
        match self.seed_framing {
            0 => Some(Target::ZeroVertex),
            -1 => Some(Target::Empty),
            _ => None,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {} {}", self.seed, self.seed_framing)?;
        write!(f, "{}", self.moves)
    }
}

pub fn blow_up(g: &PlumbingGraph, locus: &Locus) -> Result<(PlumbingGraph, VertexId)> {
    blow_up_as(g, locus, g.fresh_id("n"))
}

pub fn blow_up_as(
    g: &PlumbingGraph,
    locus: &Locus,
    created: VertexId,
) -> Result<(PlumbingGraph, VertexId)> {
    let mut h = g.clone();
    match locus {
        Locus::Vertex(v) => {
            let i = g
                .index_of(v)
                .ok_or_else(|| Error::MissingLocus(format!("vertex `{v}`")))?;
            let n = h.add_vertex(created.clone(), -1)?;
            h.add_edge_idx(i, n)?;
            h.set_framing(i, g.framing(i) - 1);
        }
        Locus::Edge(u, w) => {
            let missing = || Error::MissingLocus(format!("edge `{u}`-`{w}`"));
            let i = g.index_of(u).ok_or_else(missing)?;
            let j = g.index_of(w).ok_or_else(missing)?;
            if !h.remove_edge_idx(i, j) {
                return Err(missing());
            }
            let n = h.add_vertex(created.clone(), -1)?;
            h.add_edge_idx(i, n)?;
            h.add_edge_idx(n, j)?;
            h.set_framing(i, g.framing(i) - 1);
            h.set_framing(j, g.framing(j) - 1);
        }
    }
    Ok((h, created))
}

pub fn blow_down(g: &PlumbingGraph, v: &VertexId) -> Result<PlumbingGraph> {
    let i = g.require(v)?;
    blow_down_idx(g, i)
}

pub fn can_blow_down(g: &PlumbingGraph, i: usize) -> std::result::Result<(), &'static str> {
    if g.framing(i) != -1 {
        return Err("framing is not -1");
    }
    if g.arrows_at(i).next().is_some() {
        return Err("vertex carries an arrow");
    }
    match g.neighbors(i) {
        [] | [_] => Ok(()),
        [a, b] if !g.has_edge(*a, *b) => Ok(()),
        [_, _] => Err("neighbors are already adjacent"),
        _ => Err("degree exceeds 2"),
    }
}

pub fn blow_down_idx(g: &PlumbingGraph, i: usize) -> Result<PlumbingGraph> {
    can_blow_down(g, i).map_err(|why| Error::NotBlowdownable(g.id(i).clone(), why))?;
    let nbrs = g.neighbors(i).to_vec();
    let mut h = g.clone();
    for &w in &nbrs {
        h.set_framing(w, g.framing(w) + 1);
    }
    if let [a, b] = nbrs[..] {
        h.add_edge_idx(a, b)?;
    }
    h.remove_vertex(i);
    Ok(h)
}

/// Applies one move; blowups also return the created id.
pub fn apply_move(g: &PlumbingGraph, m: &Move) -> Result<(PlumbingGraph, Option<VertexId>)> {
    let locus = match &m.kind {
        MoveKind::BlowDown(v) => return Ok((blow_down(g, v)?, None)),
        MoveKind::BlowUpVertex(v) => Locus::Vertex(v.clone()),
        MoveKind::BlowUpEdge(u, w) => Locus::Edge(u.clone(), w.clone()),
    };
    let created = m.created.clone().unwrap_or_else(|| g.fresh_id("n"));
    let (h, id) = blow_up_as(g, &locus, created)?;
    Ok((h, Some(id)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Empty,
    ZeroVertex,
}

impl Target {
    pub fn reached(self, g: &PlumbingGraph) -> bool {
        match self {
            Target::Empty => g.is_empty(),
            Target::ZeroVertex => g.len() == 1 && g.framing(0) == 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(MoveSequence),
    NotFound,
    /// The memo table outgrew the state cap before the search finished.
    Inconclusive { states: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_states: 1_000_000,
        }
    }
}

pub fn blowdown_search(g: &PlumbingGraph, target: Target) -> SearchOutcome {
    blowdown_search_with(g, target, SearchLimits::default())
}

/// Depth-first search over blowdowns, smallest canonical successor first,
/// memoized on canonical forms. Graphs with cycles, or whose lattice cannot
/// match the target's, are rejected up front: blowdowns only split off ⟨−1⟩
/// summands and never shorten a cycle below a triangle.
pub fn blowdown_search_with(g: &PlumbingGraph, target: Target, limits: SearchLimits) -> SearchOutcome {
    if target.reached(g) {
        return SearchOutcome::Found(MoveSequence::default());
    }
    if !g.is_forest() || !lattice_compatible(g, target) {
        return SearchOutcome::NotFound;
    }
    let mut s = Searcher {
        target,
        visited: HashSet::new(),
        max: limits.max_states,
        path: Vec::new(),
    };
    match s.dfs(g.clone()) {
        Step::Found => SearchOutcome::Found(MoveSequence::new(
            s.path.into_iter().map(Move::blow_down).collect(),
        )),
        Step::Dead => SearchOutcome::NotFound,
        Step::Abort => SearchOutcome::Inconclusive {
            states: s.visited.len(),
        },
    }
}

fn lattice_compatible(g: &PlumbingGraph, target: Target) -> bool {
    let q = intersection_matrix(g);
    let r = classify_definiteness(&q);
    match target {
        Target::Empty => r.is_negative_definite() && q.determinant().abs() == BigInt::one(),
        Target::ZeroVertex => r.class == DefinitenessClass::NegativeSemidefinite && r.nullity == 1,
    }
}

enum Step {
    Found,
    Dead,
    Abort,
}

struct Searcher {
    target: Target,
    visited: HashSet<Vec<i64>>,
    max: usize,
    path: Vec<VertexId>,
}

impl Searcher {
    fn dead(&self, g: &PlumbingGraph) -> bool {
        let nonneg = (0..g.len()).filter(|&i| g.framing(i) >= 0).count();
        match self.target {
            Target::Empty => nonneg > 0 || !g.arrows().is_empty(),
            Target::ZeroVertex => nonneg > 1 || (0..g.len()).any(|i| g.framing(i) > 0),
        }
    }

    fn dfs(&mut self, g: PlumbingGraph) -> Step {
        if self.target.reached(&g) {
            return Step::Found;
        }
        if self.dead(&g) {
            return Step::Dead;
        }
        let key = canonical_form(&g).expect("blowdowns keep forests");
        if !self.visited.insert(key) {
            return Step::Dead;
        }
        if self.visited.len() > self.max {
            return Step::Abort;
        }
        let mut succ: Vec<(Vec<i64>, VertexId, PlumbingGraph)> = (0..g.len())
            .filter(|&i| can_blow_down(&g, i).is_ok())
            .map(|i| {
                let h = blow_down_idx(&g, i).unwrap();
                (canonical_form(&h).unwrap(), g.id(i).clone(), h)
            })
            .collect();
        succ.sort_by(|a, b| a.0.cmp(&b.0));
        succ.dedup_by(|a, b| a.0 == b.0);
        for (_, id, h) in succ {
            self.path.push(id);
            match self.dfs(h) {
                Step::Dead => {
                    self.path.pop();
                }
                other => return other,
            }
        }
        Step::Dead
    }
}

/// Reverses a blowdown sequence that empties `g` into a construction from a
/// −1 seed (the last vertex blown down) that rebuilds `g` with its ids.
pub fn construction_from_blowdowns(g: &PlumbingGraph, seq: &MoveSequence) -> Result<Construction> {
    let mut cur = g.clone();
    let mut rev = Vec::new();
    let mut seed = None;
    for m in &seq.moves {
        let MoveKind::BlowDown(v) = &m.kind else {
            return Err(Error::InvalidSequence(format!("`{m}` is not a blowdown")));
        };
        let i = cur.require(v)?;
        let nbrs: Vec<VertexId> = cur.neighbors(i).iter().map(|&w| cur.id(w).clone()).collect();
        match &nbrs[..] {
            [] => seed = Some(v.clone()),
            [u] => rev.push(Move::blow_up_vertex(u.clone()).creating(v.clone())),
            [u, w] => rev.push(Move::blow_up_edge(u.clone(), w.clone()).creating(v.clone())),
            _ => unreachable!("blow_down rejects degree above 2"),
        }
        cur = blow_down_idx(&cur, i)?;
    }
    let seed = match (seed, cur.is_empty()) {
        (Some(s), true) => s,
        _ => return Err(Error::InvalidSequence("sequence does not reach the empty graph".into())),
    };
    rev.reverse();
    Ok(Construction::new(seed, -1, rev))
}

/// Rewrites a construction of Γ̃ so that everything outside `keep` is a
/// (−1)-leaf on Γ. Blowups touching Γ are kept (an edge blowup with one end
/// in Γ becomes a vertex blowup there) and the rest dropped; if that does not
/// produce a leaf augmentation, the construction is rebuilt from the diagonal
/// lattice embedding that the blowups induce.
pub fn normalize_augmentation(
    c: &Construction,
    keep: &[VertexId],
) -> Result<(PlumbingGraph, Construction)> {
    if c.target().is_none() {
        return Err(Error::InvalidSequence(format!(
            "seed framing {} is neither 0 nor -1",
            c.seed_framing
        )));
    }
    let (full, created) = c.build_trace()?;
    let keep_set: BTreeSet<VertexId> = keep.iter().cloned().collect();
    let mut keep_idx = Vec::new();
    for id in &keep_set {
        keep_idx.push(
            full.index_of(id)
                .ok_or_else(|| Error::InvalidSequence(format!("kept vertex `{id}` never built")))?,
        );
    }
    let gamma = full.induced(&keep_idx);
    if gamma.is_empty() || !gamma.is_connected() {
        return Err(Error::InvalidSequence("kept vertices must span a nonempty connected subgraph".into()));
    }
    if let Some(out) = surgery(c, &created, &keep_set, &full) {
        if let Ok(g) = out.build() {
            if is_leaf_augmentation(&g, &gamma) {
                return Ok((g, out));
            }
        }
    }
    let out = lattice_route(c, &keep_set)?;
    let g = out.build()?;
    if !is_leaf_augmentation(&g, &gamma) {
        return Err(Error::Internal("lattice normalization lost the kept subgraph".into()));
    }
    Ok((g, out))
}

fn surgery(
    c: &Construction,
    created: &[VertexId],
    keep: &BTreeSet<VertexId>,
    full: &PlumbingGraph,
) -> Option<Construction> {
    if !keep.contains(&c.seed) {
        return None;
    }
    let mut moves = Vec::new();
    for (m, n) in c.moves.moves.iter().zip(created) {
        let kept_locus = match &m.kind {
            MoveKind::BlowUpVertex(v) if keep.contains(v) => Some(Move::blow_up_vertex(v.clone())),
            MoveKind::BlowUpEdge(u, w) => match (keep.contains(u), keep.contains(w)) {
                (true, true) => Some(Move::blow_up_edge(u.clone(), w.clone())),
                (true, false) => Some(Move::blow_up_vertex(u.clone())),
                (false, true) => Some(Move::blow_up_vertex(w.clone())),
                (false, false) => None,
            },
            _ => None,
        };
        match kept_locus {
            Some(nm) => moves.push(nm.creating(n.clone())),
            None if keep.contains(n) => return None,
            None => {}
        }
    }
    let mut out = Construction::new(c.seed.clone(), c.seed_framing, moves);
    let g = out.build().ok()?;
    // raise any framing left too high back to its original value
    let mut extra = Vec::new();
    for id in keep {
        let have = g.framing(g.index_of(id)?);
        let want = full.framing(full.index_of(id)?);
        if have < want {
            return None;
        }
        for _ in want..have {
            extra.push(Move::blow_up_vertex(id.clone()));
        }
    }
    out.moves.moves.extend(extra);
    Some(out)
}

fn lattice_route(c: &Construction, keep: &BTreeSet<VertexId>) -> Result<Construction> {
    let (sw, phi) = embedding::construction_embedding(c)?;
    let keep_ids: Vec<VertexId> = keep.iter().cloned().collect();
    let idx: Vec<usize> = keep_ids.iter().map(|id| sw.require(id)).collect::<Result<_>>()?;
    let sub = sw.induced(&idx);
    let phi = phi.restrict(&sub);
    let (aug, aug_phi) = embedding::augment_from_embedding(&sub, &phi)?;
    let seq = embedding::blowdown_by_embedding(&aug, &aug_phi)?;
    let mut out = construction_from_blowdowns(&aug, &seq)?;
    if c.seed_framing == 0 {
        out.seed_framing = 0;
        if !keep.contains(&c.seed) {
            // the seed's framing is one too high now; a leaf restores it
            let g = out.build()?;
            let leaf = fresh_avoiding(&g, keep, &out);
            out.moves.moves.push(Move::blow_up_vertex(out.seed.clone()).creating(leaf));
        }
    }
    Ok(out)
}

fn fresh_avoiding(g: &PlumbingGraph, keep: &BTreeSet<VertexId>, c: &Construction) -> VertexId {
    let mut k = 1;
    loop {
        let id = VertexId::new(format!("n{k}"));
        if !g.contains(&id) && !keep.contains(&id) && c.seed != id {
            return id;
        }
        k += 1;
    }
}

/// `g` restricted to the ids of `gamma` equals `gamma`, and every other
/// vertex of `g` is a (−1)-leaf hanging off `gamma`.
pub fn is_leaf_augmentation(g: &PlumbingGraph, gamma: &PlumbingGraph) -> bool {
    let mut idx = Vec::new();
    for v in gamma.vertices() {
        match g.index_of(&v.id) {
            Some(i) if g.framing(i) == v.framing => idx.push(i),
            _ => return false,
        }
    }
    for a in 0..gamma.len() {
        for b in 0..gamma.len() {
            if gamma.has_edge(a, b) != g.has_edge(idx[a], idx[b]) {
                return false;
            }
        }
    }
    (0..g.len()).filter(|i| !idx.contains(i)).all(|i| {
        g.framing(i) == -1 && g.degree(i) == 1 && idx.contains(&g.neighbors(i)[0])
    })
}
