//! Divisors of functions on the resolution: arrows, A'Campo Euler
//! characteristics, null cycles of augmentations, Riemann–Roch, and capping
//! binding components with Hirzebruch–Jung chains.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::birational::{blow_down_idx, can_blow_down, Construction, MoveKind};
use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::{classify_definiteness, intersection_matrix, solve_q, Divisor};
use crate::{Error, Rational, Result};

/// Arrow multiplicities `a_v = −(D · E_v)`, zero entries included.
pub fn arrows_from_divisor(g: &PlumbingGraph, d: &Divisor) -> Result<BTreeMap<VertexId, u64>> {
    let x = d.to_vec(g)?;
    let qx = intersection_matrix(g).apply(&x);
    let mut out = BTreeMap::new();
    for (i, p) in qx.into_iter().enumerate() {
        if p > 0 {
            return Err(Error::NotInLipmanCone(g.id(i).clone()));
        }
        out.insert(g.id(i).clone(), (-p) as u64);
    }
    Ok(out)
}

/// Solves `Q r = −a` and insists on a positive integral answer.
pub fn divisor_from_arrows(g: &PlumbingGraph, arrows: &BTreeMap<VertexId, u64>) -> Result<Divisor> {
    let q = intersection_matrix(g);
    if !classify_definiteness(&q).is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    for id in arrows.keys() {
        g.require(id)?;
    }
    let b: Vec<Rational> = g
        .vertices()
        .iter()
        .map(|v| -Rational::from_integer((*arrows.get(&v.id).unwrap_or(&0)).into()))
        .collect();
    let r = solve_q(&q, &b)?;
    if r.iter().any(|x| !x.is_integer()) {
        let shown: Vec<String> = r.iter().map(ToString::to_string).collect();
        return Err(Error::NonIntegral(format!("r = ({})", shown.join(", "))));
    }
    let mut coeffs = Vec::with_capacity(r.len());
    for (i, x) in r.iter().enumerate() {
        if !x.is_positive() {
            return Err(Error::NonPositive(g.id(i).clone()));
        }
        coeffs.push(x.to_integer().to_i64().expect("coefficient exceeds i64"));
    }
    Ok(Divisor::from_vec(g, &coeffs))
}

/// Totals arrow multiplicities per vertex.
pub fn arrow_totals(g: &PlumbingGraph) -> BTreeMap<VertexId, u64> {
    let mut m = BTreeMap::new();
    for a in g.arrows() {
        *m.entry(a.at.clone()).or_insert(0) += a.multiplicity;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCount {
    pub at: VertexId,
    pub multiplicity: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberInvariants {
    pub euler: i64,
    pub boundary_components: Vec<BoundaryCount>,
    pub total_boundary: u64,
    pub genus: u64,
    pub planar: bool,
}

/// A'Campo's formula `χ = Σ r_v (2 − d_v)` with `d_v` counting arrows,
/// `gcd(r_v, a)` boundary circles per arrow, and the genus from
/// `χ = 2 − 2g − b`. The arrows of `g` must be exactly those of `d`.
pub fn fiber_invariants(g: &PlumbingGraph, d: &Divisor) -> Result<FiberInvariants> {
    let r = d.to_vec(g)?;
    if let Some(i) = r.iter().position(|&x| x <= 0) {
        return Err(Error::InconsistentArrows(format!(
            "coefficient at `{}` is not positive",
            g.id(i)
        )));
    }
    let expected = arrows_from_divisor(g, d)
        .map_err(|e| Error::InconsistentArrows(e.to_string()))?;
    let given = arrow_totals(g);
    for (id, &a) in &expected {
        let have = given.get(id).copied().unwrap_or(0);
        if have != a {
            return Err(Error::InconsistentArrows(format!(
                "`{id}` carries arrows of total multiplicity {have}, the divisor needs {a}"
            )));
        }
    }
    let mut euler = 0i64;
    for (i, &rv) in r.iter().enumerate() {
        let dv = (g.degree(i) + g.arrows_at(i).count()) as i64;
        euler += rv * (2 - dv);
    }
    let mut boundary_components = Vec::new();
    for a in g.arrows() {
        let rv = r[g.require(&a.at)?];
        boundary_components.push(BoundaryCount {
            at: a.at.clone(),
            multiplicity: a.multiplicity,
            count: (rv as u64).gcd(&a.multiplicity),
        });
    }
    let b: u64 = boundary_components.iter().map(|c| c.count).sum();
    let twice_g = 2 - euler - b as i64;
    if twice_g < 0 || twice_g % 2 != 0 {
        return Err(Error::InconsistentArrows(format!(
            "χ = {euler} and b = {b} give no integral genus"
        )));
    }
    let genus = (twice_g / 2) as u64;
    Ok(FiberInvariants {
        euler,
        boundary_components,
        total_boundary: b,
        genus,
        planar: genus == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullDivisor {
    /// Generator of the null space of Γ̃.
    pub full: Divisor,
    /// Restriction to Γ.
    pub restricted: Divisor,
    /// Arrows on Γ, one per removed leaf, with the leaf's multiplicity.
    pub arrows: Vec<(VertexId, u64)>,
}

/// Tracks multiplicities along a construction from a 0-framed seed: the seed
/// has coefficient 1, a vertex blowup copies `m_v`, an edge blowup adds
/// `m_u + m_w`. Everything outside `keep` must be a (−1)-leaf on Γ.
pub fn pm_null_divisor(c: &Construction, keep: &[VertexId]) -> Result<NullDivisor> {
    if c.seed_framing != 0 {
        return Err(Error::InvalidSequence("seed must be a 0-framed vertex".into()));
    }
    let (g, created) = c.build_trace()?;
    let mut mult: BTreeMap<VertexId, i64> = BTreeMap::new();
    mult.insert(c.seed.clone(), 1);
    for (m, n) in c.moves.moves.iter().zip(&created) {
        let v = match &m.kind {
            MoveKind::BlowUpVertex(v) => mult[v],
            MoveKind::BlowUpEdge(u, w) => mult[u] + mult[w],
            MoveKind::BlowDown(_) => unreachable!("build_trace rejects blowdowns"),
        };
        mult.insert(n.clone(), v);
    }
    for id in keep {
        g.require(id)
            .map_err(|_| Error::InvalidSequence(format!("kept vertex `{id}` is not built")))?;
    }
    let mut arrows = Vec::new();
    for i in 0..g.len() {
        let id = g.id(i);
        if keep.contains(id) {
            continue;
        }
        let leafy = g.framing(i) == -1
            && g.degree(i) == 1
            && keep.contains(g.id(g.neighbors(i)[0]));
        if !leafy {
            return Err(Error::InvalidSequence(format!(
                "`{id}` is outside Γ but not a (-1)-leaf on it"
            )));
        }
        arrows.push((g.id(g.neighbors(i)[0]).clone(), mult[id] as u64));
    }
    let full = Divisor(mult);
    Ok(NullDivisor {
        restricted: full.restrict(keep),
        full,
        arrows,
    })
}

/// `χ(D) = −½ (D·D + Σ d_v (−framing_v − 2))`, with K only entering through
/// its pairings on genus-0 curves.
pub fn riemann_roch_chi(g: &PlumbingGraph, d: &Divisor) -> Result<Rational> {
    g.require_genus_zero()?;
    let x = d.to_vec(g)?;
    let q = intersection_matrix(g);
    let dd = q.pair(&x, &x);
    let dk: i64 = x.iter().enumerate().map(|(i, &c)| c * (-g.framing(i) - 2)).sum();
    Ok(-Rational::new((dd + dk).into(), 2.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HJChain {
    pub coefficients: Vec<i64>,
}

impl HJChain {
    pub fn framings(&self) -> Vec<i64> {
        self.coefficients.iter().map(|c| -c).collect()
    }

    /// `c₁ − 1/(c₂ − 1/(…))`.
    pub fn value(&self) -> Rational {
        let mut it = self.coefficients.iter().rev();
        let Some(&last) = it.next() else {
            return Rational::zero();
        };
        let mut v = Rational::from_integer(last.into());
        for &c in it {
            v = Rational::from_integer(c.into()) - v.recip();
        }
        v
    }
}

/// Negative continued fraction of `b/a`: `c = ⌈b/a⌉`, then continue with
/// `a/(c·a − b)` until the remainder vanishes.
pub fn hj_expansion(b: u64, a: u64) -> Result<HJChain> {
    if a == 0 || b == 0 || b.gcd(&a) != 1 {
        return Err(Error::NotCoprime(b, a));
    }
    let (mut p, mut q) = (b, a);
    let mut coefficients = Vec::new();
    while q != 0 {
        let c = p.div_ceil(q);
        coefficients.push(c as i64);
        (p, q) = (q, c * q - p);
    }
    Ok(HJChain { coefficients })
}

/// Replaces one arrow of multiplicity `a` at `v` by the chain for the slope
/// `−r_v/a` (reduced), attached by its first vertex, then blows down any
/// (−1)-vertices the chain introduced.
pub fn cap_binding_component(g: &PlumbingGraph, v: &VertexId, a: u64, r_v: u64) -> Result<PlumbingGraph> {
    let mut h = g.clone();
    if !h.remove_arrow(v, a) {
        return Err(Error::MissingArrow(v.clone(), a));
    }
    let d = r_v.gcd(&a);
    let chain = hj_expansion(r_v / d, a / d)?;
    let mut prev = h.require(v)?;
    let mut added = Vec::new();
    for f in chain.framings() {
        let id = h.fresh_id("h");
        let i = h.add_vertex(id.clone(), f)?;
        h.add_edge_idx(prev, i)?;
        added.push(id);
        prev = i;
    }
    while let Some(i) = added
        .iter()
        .filter_map(|id| h.index_of(id))
        .find(|&i| h.framing(i) == -1 && can_blow_down(&h, i).is_ok())
    {
        let id = h.id(i).clone();
        h = blow_down_idx(&h, i)?;
        added.retain(|x| x != &id);
    }
    Ok(h)
}
