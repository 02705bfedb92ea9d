//! Sandwiched and pm decisions with replayable certificates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::birational::{is_leaf_augmentation, MoveSequence, Target};
use crate::embedding::search::{find_embedding_with, SearchOptions, SearchResult};
use crate::embedding::{augment_from_embedding, blowdown_by_embedding, Embedding, Image, Mode};
use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::{classify_definiteness, intersection_matrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

impl Verdict {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::True => Some(true),
            Verdict::False => Some(false),
            Verdict::Inconclusive => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Γ plus (−1)-leaves, and blowdowns taking that graph to the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    pub augmented: PlumbingGraph,
    /// `(attached vertex, new leaf)` pairs.
    pub added_leaves: Vec<(VertexId, VertexId)>,
    pub blowdown: MoveSequence,
    pub target: Target,
}

impl SandwichCertificate {
    /// Checks the certificate against `g` from scratch.
    pub fn replay(&self, g: &PlumbingGraph) -> Result<()> {
        let bare = g.without_arrows();
        if !is_leaf_augmentation(&self.augmented, &bare) {
            return Err(Error::InvalidSequence("augmented graph is not Γ plus (-1)-leaves".into()));
        }
        if self.augmented.len() != g.len() + self.added_leaves.len() {
            return Err(Error::InvalidSequence("leaf list does not match the augmented graph".into()));
        }
        for (host, leaf) in &self.added_leaves {
            let i = self.augmented.require(leaf)?;
            let h = self.augmented.require(host)?;
            if g.contains(leaf) || !self.augmented.has_edge(i, h) {
                return Err(Error::InvalidSequence(format!("leaf `{leaf}` is not attached to `{host}`")));
            }
        }
        let end = self.blowdown.replay(&self.augmented)?;
        if !self.target.reached(&end) {
            return Err(Error::InvalidSequence("blowdowns stop short of the target".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub certificate: Option<SandwichCertificate>,
    pub embedding: Option<Embedding>,
    /// Why the answer is false or inconclusive, when there is a short reason.
    pub note: Option<String>,
}

impl Decision {
    fn no(note: impl Into<String>) -> Self {
        Decision {
            verdict: Verdict::False,
            certificate: None,
            embedding: None,
            note: Some(note.into()),
        }
    }

    fn unknown(note: impl Into<String>) -> Self {
        Decision {
            verdict: Verdict::Inconclusive,
            certificate: None,
            embedding: None,
            note: Some(note.into()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub search: SearchOptions,
    /// Run the last-vertex route for pm on graphs up to this size.
    pub cross_check_max: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            search: SearchOptions::default(),
            cross_check_max: 8,
        }
    }
}

pub fn decide_sandwiched(g: &PlumbingGraph) -> Result<Decision> {
    decide_sandwiched_with(g, &DecideOptions::default())
}

/// Sandwiched iff an s-embedding exists; the certificate adds a leaf per
/// type-2 index and blows down basis-vector vertices.
pub fn decide_sandwiched_with(g: &PlumbingGraph, opts: &DecideOptions) -> Result<Decision> {
    let g = &g.without_arrows();
    g.require_tree()?;
    if !classify_definiteness(&intersection_matrix(g)).is_negative_definite() {
        return Ok(Decision::no("intersection form is not negative definite"));
    }
    let phi = match find_embedding_with(g, Mode::S, &opts.search)? {
        SearchResult::Found(phi) => phi,
        SearchResult::Absent => return Ok(Decision::no("no s-embedding within the proven basis bound")),
        SearchResult::BudgetExceeded(why) => return Ok(Decision::unknown(why)),
    };
    let (aug, psi) = augment_from_embedding(g, &phi)?;
    let blowdown = blowdown_by_embedding(&aug, &psi)?;
    let cert = SandwichCertificate {
        added_leaves: added_leaves(g, &aug),
        augmented: aug,
        blowdown,
        target: Target::Empty,
    };
    cert.replay(g)?;
    Ok(Decision {
        verdict: Verdict::True,
        certificate: Some(cert),
        embedding: Some(phi),
        note: None,
    })
}

pub fn decide_pm(g: &PlumbingGraph) -> Result<Decision> {
    decide_pm_with(g, &DecideOptions::default())
}

/// pm iff a p-embedding exists. A pure-negative vertex `w` turns into an
/// s-embedding of Γ with `w` lowered by one, whose blowdown ends at `w`;
/// without one, the type-1 vertex gets an extra leaf. On small graphs the
/// answer is compared with the last-vertex route.
pub fn decide_pm_with(g: &PlumbingGraph, opts: &DecideOptions) -> Result<Decision> {
    let g = &g.without_arrows();
    g.require_tree()?;
    if !classify_definiteness(&intersection_matrix(g)).is_negative_definite() {
        return Ok(Decision::no("intersection form is not negative definite"));
    }
    let decision = match find_embedding_with(g, Mode::P, &opts.search)? {
        SearchResult::Found(phi) => {
            let cert = pm_certificate(g, &phi)?;
            cert.replay(g)?;
            Decision {
                verdict: Verdict::True,
                certificate: Some(cert),
                embedding: Some(phi),
                note: None,
            }
        }
        SearchResult::Absent => Decision::no("no p-embedding within the proven basis bound"),
        SearchResult::BudgetExceeded(why) => Decision::unknown(why),
    };
    if g.len() <= opts.cross_check_max {
        let other = pm_by_last_vertex(g, &opts.search)?;
        match (decision.verdict, other) {
            (Verdict::True, Verdict::False) | (Verdict::False, Verdict::True) => {
                return Err(Error::Internal(format!(
                    "pm routes disagree: p-embedding says {}, last-vertex route says {other}",
                    decision.verdict
                )))
            }
            _ => {}
        }
    }
    Ok(decision)
}

fn pm_certificate(g: &PlumbingGraph, phi: &Embedding) -> Result<SandwichCertificate> {
    let pure = phi
        .images
        .iter()
        .find(|(_, im)| im.positive.is_none())
        .map(|(id, _)| id.clone());
    match pure {
        Some(w) => {
            let wi = g.require(&w)?;
            let mut lowered = g.clone();
            lowered.set_framing(wi, g.framing(wi) - 1);
            let mut psi = phi.clone();
            psi.mode = Mode::S;
            let fresh = psi.basis_size;
            psi.basis_size += 1;
            for (id, im) in &mut psi.images {
                if id == &w {
                    im.positive = Some(fresh);
                }
            }
            let (aug, aug_psi) = augment_from_embedding(&lowered, &psi)?;
            let mut seq = blowdown_by_embedding(&aug, &aug_psi)?;
            if seq.moves.pop().map(|m| m.kind) != Some(crate::birational::MoveKind::BlowDown(w.clone())) {
                return Err(Error::Internal("blowdown did not end at the pure-negative vertex".into()));
            }
            let mut augmented = aug;
            let ai = augmented.require(&w)?;
            augmented.set_framing(ai, g.framing(wi));
            Ok(SandwichCertificate {
                added_leaves: added_leaves(g, &augmented),
                augmented,
                blowdown: seq,
                target: Target::ZeroVertex,
            })
        }
        None => {
            let mut psi = phi.clone();
            psi.mode = Mode::S;
            let (mut aug, aug_psi) = augment_from_embedding(g, &psi)?;
            let mut seq = blowdown_by_embedding(&aug, &aug_psi)?;
            let last = match seq.moves.pop().map(|m| m.kind) {
                Some(crate::birational::MoveKind::BlowDown(v)) => v,
                _ => return Err(Error::Internal("empty blowdown sequence".into())),
            };
            let leaf = aug.fresh_id("l");
            aug.add_vertex(leaf.clone(), -1)?;
            aug.add_edge(last, leaf.clone())?;
            seq.moves.push(crate::birational::Move::blow_down(leaf));
            Ok(SandwichCertificate {
                added_leaves: added_leaves(g, &aug),
                augmented: aug,
                blowdown: seq,
                target: Target::ZeroVertex,
            })
        }
    }
}

fn added_leaves(g: &PlumbingGraph, aug: &PlumbingGraph) -> Vec<(VertexId, VertexId)> {
    (0..aug.len())
        .filter(|&i| !g.contains(aug.id(i)))
        .map(|i| (aug.id(aug.neighbors(i)[0]).clone(), aug.id(i).clone()))
        .collect()
}

/// pm through the other characterization: some vertex `v` such that Γ with
/// `v` lowered by one has an s-embedding whose type-1 element sits at `v`,
/// i.e. a sandwiched presentation blowing down last at `v`.
pub fn pm_by_last_vertex(g: &PlumbingGraph, search: &SearchOptions) -> Result<Verdict> {
    let mut budget_hit = false;
    for v in 0..g.len() {
        let mut lowered = g.clone();
        lowered.set_framing(v, g.framing(v) - 1);
        let opts = SearchOptions {
            pinned: Some(v),
            ..search.clone()
        };
        match find_embedding_with(&lowered, Mode::S, &opts)? {
            SearchResult::Found(phi) => {
                debug_assert!(phi.image(g.id(v)).is_some_and(|im: &Image| im.positive.is_some()));
                return Ok(Verdict::True);
            }
            SearchResult::Absent => {}
            SearchResult::BudgetExceeded(_) => budget_hit = true,
        }
    }
    Ok(if budget_hit { Verdict::Inconclusive } else { Verdict::False })
}
