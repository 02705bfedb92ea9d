//! Embeddings of plumbing lattices into the negative diagonal lattice ⟨−1⟩ᴺ
//! where every connected subgraph sums to `e_* − Σ e_i` (s-embeddings) or to
//! at most one positive basis vector and negatives (p-embeddings).

mod decide;
mod search;
mod subsets;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::birational::{blow_down_idx, can_blow_down, Construction, Move, MoveSequence};
use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::intersection_matrix;
use crate::{Error, Result};

pub use decide::{
    decide_pm, decide_pm_with, decide_sandwiched, decide_sandwiched_with, pm_by_last_vertex,
    Decision, DecideOptions, SandwichCertificate, Verdict,
};
pub use search::{find_embedding, find_embedding_with, SearchOptions, SearchResult};
pub use subsets::for_each_connected_subset;

/// Default cap on connected subgraphs examined by verification and search.
pub const SUBSET_CAP: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    S,
    P,
}

/// Image of one vertex: `e_positive − Σ e_i` over `negatives`. Indices are
/// 0-based here and 1-based in the text format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Image {
    pub positive: Option<usize>,
    pub negatives: BTreeSet<usize>,
}

impl Image {
    pub fn basis(i: usize) -> Self {
        Image {
            positive: Some(i),
            negatives: BTreeSet::new(),
        }
    }

    pub fn with_negatives(positive: Option<usize>, negatives: impl IntoIterator<Item = usize>) -> Self {
        Image {
            positive,
            negatives: negatives.into_iter().collect(),
        }
    }

    pub fn self_pairing(&self) -> i64 {
        -(self.positive.is_some() as i64) - self.negatives.len() as i64
    }

    /// Pairing in ⟨−1⟩ᴺ.
    pub fn pair(&self, other: &Image) -> i64 {
        let mut s = 0;
        if let (Some(a), Some(b)) = (self.positive, other.positive) {
            s -= (a == b) as i64;
        }
        if let Some(a) = self.positive {
            s += other.negatives.contains(&a) as i64;
        }
        if let Some(b) = other.positive {
            s += self.negatives.contains(&b) as i64;
        }
        s - self.negatives.intersection(&other.negatives).count() as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub mode: Mode,
    pub basis_size: usize,
    pub images: Vec<(VertexId, Image)>,
}

impl Embedding {
    pub fn image(&self, id: &VertexId) -> Option<&Image> {
        self.images.iter().find(|(v, _)| v == id).map(|(_, im)| im)
    }

    fn image_mut(&mut self, id: &VertexId) -> Option<&mut Image> {
        self.images.iter_mut().find(|(v, _)| v == id).map(|(_, im)| im)
    }

    /// Images in the graph's vertex order.
    pub fn aligned(&self, g: &PlumbingGraph) -> Result<Vec<Image>> {
        if self.images.len() != g.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} vertices",
                self.images.len(),
                g.len()
            )));
        }
        g.vertices()
            .iter()
            .map(|v| {
                let im = self
                    .image(&v.id)
                    .ok_or_else(|| Error::DimensionMismatch(format!("no image for `{}`", v.id)))?;
                if let Some(i) = im.positive.iter().chain(&im.negatives).find(|&&i| i >= self.basis_size) {
                    return Err(Error::DimensionMismatch(format!(
                        "index {} exceeds basis size {}",
                        i + 1,
                        self.basis_size
                    )));
                }
                Ok(im.clone())
            })
            .collect()
    }

    /// The embedding of the induced subgraph `sub`, with the used basis
    /// indices renumbered in order of first use.
    pub fn restrict(&self, sub: &PlumbingGraph) -> Embedding {
        let mut map = BTreeMap::new();
        let mut images = Vec::new();
        for v in sub.vertices() {
            let im = self.image(&v.id).cloned().unwrap_or_default();
            for &i in im.positive.iter().chain(&im.negatives) {
                let next = map.len();
                map.entry(i).or_insert(next);
            }
            images.push((v.id.clone(), im));
        }
        for (_, im) in &mut images {
            im.positive = im.positive.map(|i| map[&i]);
            im.negatives = im.negatives.iter().map(|i| map[i]).collect();
        }
        Embedding {
            mode: self.mode,
            basis_size: map.len(),
            images,
        }
    }

    /// Signed occurrence counts `(plus, minus)` per basis index.
    pub fn occurrences(&self) -> Vec<(usize, usize)> {
        let mut occ = vec![(0, 0); self.basis_size];
        for (_, im) in &self.images {
            if let Some(p) = im.positive {
                occ[p].0 += 1;
            }
            for &i in &im.negatives {
                occ[i].1 += 1;
            }
        }
        occ
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, im) in &self.images {
            write!(f, "{id} :")?;
            if let Some(p) = im.positive {
                write!(f, " +{}", p + 1)?;
            }
            if !im.negatives.is_empty() {
                write!(f, " -")?;
                for i in &im.negatives {
                    write!(f, " {}", i + 1)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// A vertex image is malformed for the mode.
    Shape { vertex: VertexId, reason: String },
    SharedPositive { a: VertexId, b: VertexId },
    Gram { a: VertexId, b: VertexId, expected: i64, found: i64 },
    Subgraph { vertices: Vec<VertexId>, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { vertex, reason } => write!(f, "image of `{vertex}`: {reason}"),
            Violation::SharedPositive { a, b } => write!(f, "`{a}` and `{b}` share a positive index"),
            Violation::Gram { a, b, expected, found } => {
                write!(f, "pairing of `{a}` and `{b}` is {found}, expected {expected}")
            }
            Violation::Subgraph { vertices, reason } => {
                let names: Vec<&str> = vertices.iter().map(VertexId::as_str).collect();
                write!(f, "subgraph {{{}}}: {reason}", names.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Ok,
    Violation(Violation),
    /// More connected subgraphs than the cap allows.
    Inconclusive { subsets: usize },
}

pub fn verify_embedding(g: &PlumbingGraph, phi: &Embedding) -> Result<Verification> {
    verify_embedding_capped(g, phi, SUBSET_CAP)
}

pub fn verify_embedding_capped(g: &PlumbingGraph, phi: &Embedding, cap: usize) -> Result<Verification> {
    let ims = phi.aligned(g)?;
    let viol = |v| Ok(Verification::Violation(v));
    let mut pure = Vec::new();
    for (k, im) in ims.iter().enumerate() {
        if let Some(p) = im.positive {
            if im.negatives.contains(&p) {
                return viol(Violation::Shape {
                    vertex: g.id(k).clone(),
                    reason: "positive index also negative".into(),
                });
            }
        } else {
            pure.push(k);
        }
    }
    match (phi.mode, pure.as_slice()) {
        (Mode::S, [k, ..]) | (Mode::P, [_, k, ..]) => {
            return viol(Violation::Shape {
                vertex: g.id(*k).clone(),
                reason: "missing positive index".into(),
            })
        }
        _ => {}
    }
    for a in 0..ims.len() {
        for b in a + 1..ims.len() {
            if ims[a].positive.is_some() && ims[a].positive == ims[b].positive {
                return viol(Violation::SharedPositive {
                    a: g.id(a).clone(),
                    b: g.id(b).clone(),
                });
            }
        }
    }
    let q = intersection_matrix(g);
    for a in 0..ims.len() {
        for b in a..ims.len() {
            let found = if a == b { ims[a].self_pairing() } else { ims[a].pair(&ims[b]) };
            if found != q.entries[a][b] {
                return viol(Violation::Gram {
                    a: g.id(a).clone(),
                    b: g.id(b).clone(),
                    expected: q.entries[a][b],
                    found,
                });
            }
        }
    }
    let n = g.len();
    if n > 64 {
        return Ok(Verification::Inconclusive { subsets: cap + 1 });
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();
    let mut coeff = vec![0i32; phi.basis_size];
    let mut bad = None;
    let mut seen = 0usize;
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for root in 0..n {
        let allowed = all & !((1u64 << root) - 1);
        let done = for_each_connected_subset(&adj, root, allowed, cap - seen.min(cap), |mask| {
            seen += 1;
            match subset_defect(&ims, mask, phi.mode, &mut coeff) {
                Some(reason) => {
                    bad = Some((mask, reason));
                    false
                }
                None => true,
            }
        });
        if let Some((mask, reason)) = bad {
            let vertices = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| g.id(v).clone()).collect();
            return viol(Violation::Subgraph { vertices, reason });
        }
        if done.is_none() {
            return Ok(Verification::Inconclusive { subsets: seen });
        }
    }
    Ok(Verification::Ok)
}

/// Why the sum over `mask` is not of the allowed shape, if it is not.
fn subset_defect(ims: &[Image], mask: u64, mode: Mode, coeff: &mut [i32]) -> Option<String> {
    let mut touched = Vec::new();
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        if let Some(p) = ims[v].positive {
            coeff[p] += 1;
            touched.push(p);
        }
        for &i in &ims[v].negatives {
            coeff[i] -= 1;
            touched.push(i);
        }
    }
    let mut plus = 0;
    let mut defect = None;
    touched.sort_unstable();
    touched.dedup();
    for &i in &touched {
        match coeff[i] {
            1 => plus += 1,
            0 | -1 => {}
            c => defect = Some(format!("coefficient {c} at index {}", i + 1)),
        }
        coeff[i] = 0;
    }
    defect.or_else(|| match (mode, plus) {
        (Mode::S, 1) | (Mode::P, 0 | 1) => None,
        _ => Some(format!("{plus} positive coefficients")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisType {
    T1,
    T2,
    T3,
    T4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisTypeReport {
    pub types: Vec<BasisType>,
}

impl BasisTypeReport {
    pub fn count(&self, t: BasisType) -> usize {
        self.types.iter().filter(|&&x| x == t).count()
    }
}

pub fn classify_basis_elements(g: &PlumbingGraph, phi: &Embedding) -> Result<BasisTypeReport> {
    require_verified(g, phi)?;
    let types = phi
        .occurrences()
        .into_iter()
        .enumerate()
        .map(|(i, occ)| match occ {
            (1, 0) => Ok(BasisType::T1),
            (0, 1) => Ok(BasisType::T2),
            (1, 1) => Ok(BasisType::T3),
            (1, 2) => Ok(BasisType::T4),
            (p, m) => Err(Error::UnverifiedEmbedding(format!(
                "index {} occurs {p} times positively and {m} times negatively",
                i + 1
            ))),
        })
        .collect::<Result<_>>()?;
    Ok(BasisTypeReport { types })
}

fn require_verified(g: &PlumbingGraph, phi: &Embedding) -> Result<()> {
    match verify_embedding(g, phi)? {
        Verification::Ok => Ok(()),
        Verification::Violation(v) => Err(Error::UnverifiedEmbedding(v.to_string())),
        Verification::Inconclusive { subsets } => Err(Error::UnverifiedEmbedding(format!(
            "verification stopped after {subsets} subgraphs"
        ))),
    }
}

/// Adds a (−1)-leaf carrying each type-2 index, giving an s-embedding with
/// as many basis vectors as vertices.
pub fn augment_from_embedding(g: &PlumbingGraph, phi: &Embedding) -> Result<(PlumbingGraph, Embedding)> {
    if phi.mode != Mode::S {
        return Err(Error::UnverifiedEmbedding("augmentation needs an s-embedding".into()));
    }
    let types = classify_basis_elements(g, phi)?;
    let mut h = g.clone();
    let mut psi = phi.clone();
    for (i, t) in types.types.iter().enumerate() {
        if *t != BasisType::T2 {
            continue;
        }
        let host = psi
            .images
            .iter()
            .find(|(_, im)| im.negatives.contains(&i))
            .map(|(id, _)| id.clone())
            .unwrap();
        let leaf = h.fresh_id("l");
        h.add_vertex(leaf.clone(), -1)?;
        h.add_edge(host, leaf.clone())?;
        psi.images.push((leaf, Image::basis(i)));
    }
    Ok((h, psi))
}

/// Blows down vertices whose image is a single basis vector until nothing is
/// left. Needs an s-embedding without type-2 indices; the vertex holding the
/// type-1 index goes last.
pub fn blowdown_by_embedding(g: &PlumbingGraph, phi: &Embedding) -> Result<MoveSequence> {
    let mut h = g.clone();
    let mut psi = phi.clone();
    let mut moves = Vec::new();
    while !h.is_empty() {
        let pick = (0..h.len()).find(|&i| {
            psi.image(h.id(i)).is_some_and(|im| im.negatives.is_empty() && im.positive.is_some())
                && can_blow_down(&h, i).is_ok()
        });
        let Some(i) = pick else {
            return Err(Error::Internal(format!(
                "no blowdownable basis vertex among {} vertices",
                h.len()
            )));
        };
        let id = h.id(i).clone();
        let e = psi.image(&id).unwrap().positive.unwrap();
        for &w in h.neighbors(i) {
            let wid = h.id(w).clone();
            psi.image_mut(&wid).unwrap().negatives.remove(&e);
        }
        psi.images.retain(|(v, _)| v != &id);
        h = blow_down_idx(&h, i)?;
        moves.push(Move::blow_down(id));
    }
    Ok(MoveSequence::new(moves))
}

/// Replays a construction while tracking the s-embedding that each blowup
/// induces (the new vertex maps to a fresh basis vector which is subtracted
/// from the blown-up vertices). A 0-framed seed is treated as a −1 seed, so
/// the returned graph has the seed framing lowered by one.
pub fn construction_embedding(c: &Construction) -> Result<(PlumbingGraph, Embedding)> {
    let lowered = Construction {
        seed_framing: -1,
        ..c.clone()
    };
    let (g, created) = lowered.build_trace()?;
    let mut phi = Embedding {
        mode: Mode::S,
        basis_size: 1,
        images: vec![(c.seed.clone(), Image::basis(0))],
    };
    for (m, n) in c.moves.moves.iter().zip(created) {
        let k = phi.basis_size;
        phi.basis_size += 1;
        let hosts: Vec<&VertexId> = match &m.kind {
            crate::birational::MoveKind::BlowUpVertex(v) => vec![v],
            crate::birational::MoveKind::BlowUpEdge(u, w) => vec![u, w],
            crate::birational::MoveKind::BlowDown(_) => unreachable!("build_trace rejects blowdowns"),
        };
        for h in hosts {
            phi.image_mut(h).unwrap().negatives.insert(k);
        }
        phi.images.push((n, Image::basis(k)));
    }
    Ok((g, phi))
}
