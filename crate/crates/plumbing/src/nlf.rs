//! Planar nearly Lefschetz fibrations, modeled by hole incidence.
//!
//! A vanishing cycle is the set of holes it encloses. A class
//! `x = w·β + Σ a_i α_i` lies in `H₂(W)` when, orbit by orbit, the summed
//! winding of `Σ a_i α_i` around the holes vanishes (disk page) or equals
//! `t·m_c` for one common `t` (sphere page). We set `w = −t`, the sign under
//! which the sphere example with two holes in one orbit has `c₁ ≡ 0`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::PlumbingGraph;
use crate::lattice::{intersection_matrix, solve};
use crate::{Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageShape {
    Disk,
    Sphere,
}

impl fmt::Display for PageShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PageShape::Disk => "disk",
            PageShape::Sphere => "sphere",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orbit {
    pub id: String,
    pub holes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VanishingCycle {
    pub id: String,
    pub encloses: BTreeSet<usize>,
}

/// Holes are referred to by position in `holes`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    pub page: PageShape,
    pub holes: Vec<String>,
    pub orbits: Vec<Orbit>,
    pub cycles: Vec<VanishingCycle>,
    pub interchanges: Vec<(usize, usize)>,
}

impl Factorization {
    /// Checks the structure that every later step relies on: the orbits
    /// partition the holes, each cycle encloses at least one hole (and on a
    /// sphere misses at least one), and all references are in range.
    pub fn new(
        page: PageShape,
        holes: Vec<String>,
        orbits: Vec<Orbit>,
        cycles: Vec<VanishingCycle>,
        interchanges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = holes.len();
        let bad = |m: String| Err(Error::Inadmissible(m));
        if page == PageShape::Sphere && n == 0 {
            return bad("a sphere page needs at least one hole".into());
        }
        if holes.iter().collect::<BTreeSet<_>>().len() != n {
            return bad("duplicate hole id".into());
        }
        let mut seen = vec![false; n];
        for o in &orbits {
            if o.holes.is_empty() {
                return bad(format!("orbit `{}` is empty", o.id));
            }
            for &h in &o.holes {
                if h >= n || std::mem::replace(&mut seen[h], true) {
                    return bad(format!("orbit `{}` does not partition the holes", o.id));
                }
            }
        }
        if let Some(h) = seen.iter().position(|s| !s) {
            return bad(format!("hole `{}` lies in no orbit", holes[h]));
        }
        for c in &cycles {
            if c.encloses.is_empty() || c.encloses.iter().any(|&h| h >= n) {
                return bad(format!("cycle `{}` must enclose existing holes", c.id));
            }
            if page == PageShape::Sphere && c.encloses.len() == n {
                return bad(format!("cycle `{}` encloses every hole of the sphere", c.id));
            }
        }
        if interchanges.iter().any(|&(a, b)| a >= n || b >= n) {
            return bad("interchange names an unknown hole".into());
        }
        Ok(Factorization {
            page,
            holes,
            orbits,
            cycles,
            interchanges,
        })
    }

    /// Stable fingerprint used to tell classes of different factorizations apart.
    pub fn context(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    fn orbit_of(&self) -> Vec<usize> {
        let mut o = vec![0; self.holes.len()];
        for (k, orb) in self.orbits.iter().enumerate() {
            for &h in &orb.holes {
                o[h] = k;
            }
        }
        o
    }

    /// Row per orbit: `|S_c ∩ cycle_i|` for each cycle, then `−m_c` for the
    /// `t` column on sphere pages.
    fn constraint_rows(&self) -> Vec<Vec<i64>> {
        let orbit_of = self.orbit_of();
        let k = self.cycles.len();
        let width = k + usize::from(self.page == PageShape::Sphere);
        let mut rows = vec![vec![0i64; width]; self.orbits.len()];
        for (i, c) in self.cycles.iter().enumerate() {
            for &h in &c.encloses {
                rows[orbit_of[h]][i] += 1;
            }
        }
        if self.page == PageShape::Sphere {
            for (row, o) in rows.iter_mut().zip(&self.orbits) {
                row[k] = -(o.holes.len() as i64);
            }
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NlfViolation {
    WrongCount { orbit: String, expected: usize, found: usize },
    Disconnected { orbit: String },
    CrossOrbit(String, String),
    DuplicatePair(String, String),
    SelfPair(String),
}

impl fmt::Display for NlfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NlfViolation::WrongCount { orbit, expected, found } => {
                write!(f, "orbit `{orbit}` needs {expected} interchanges, has {found}")
            }
            NlfViolation::Disconnected { orbit } => {
                write!(f, "interchanges on orbit `{orbit}` do not connect its holes")
            }
            NlfViolation::CrossOrbit(a, b) => write!(f, "interchange {a} {b} crosses orbits"),
            NlfViolation::DuplicatePair(a, b) => write!(f, "interchange {a} {b} is repeated"),
            NlfViolation::SelfPair(a) => write!(f, "interchange {a} {a} is degenerate"),
        }
    }
}

/// Every orbit of size `m` must carry `m − 1` interchanges forming a tree on
/// its holes.
pub fn check_admissible(f: &Factorization) -> std::result::Result<(), NlfViolation> {
    let orbit_of = f.orbit_of();
    let name = |h: usize| f.holes[h].clone();
    let mut pairs = BTreeSet::new();
    let mut per_orbit = vec![Vec::new(); f.orbits.len()];
    for &(a, b) in &f.interchanges {
        if a == b {
            return Err(NlfViolation::SelfPair(name(a)));
        }
        if orbit_of[a] != orbit_of[b] {
            return Err(NlfViolation::CrossOrbit(name(a), name(b)));
        }
        if !pairs.insert((a.min(b), a.max(b))) {
            return Err(NlfViolation::DuplicatePair(name(a), name(b)));
        }
        per_orbit[orbit_of[a]].push((a, b));
    }
    for (o, edges) in f.orbits.iter().zip(&per_orbit) {
        let expected = o.holes.len() - 1;
        if edges.len() != expected {
            return Err(NlfViolation::WrongCount {
                orbit: o.id.clone(),
                expected,
                found: edges.len(),
            });
        }
        // m − 1 edges on m holes form a tree exactly when they connect them
        let mut reached = BTreeSet::from([o.holes[0]]);
        let mut grew = true;
        while grew {
            grew = false;
            for &(a, b) in edges {
                if reached.contains(&a) != reached.contains(&b) {
                    reached.insert(a);
                    reached.insert(b);
                    grew = true;
                }
            }
        }
        if reached.len() != o.holes.len() {
            return Err(NlfViolation::Disconnected { orbit: o.id.clone() });
        }
    }
    Ok(())
}

fn require_admissible(f: &Factorization) -> Result<()> {
    check_admissible(f).map_err(|v| Error::Inadmissible(v.to_string()))
}

/// Generators are the orbits, relations the rows of `relations`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relations: Vec<Vec<i64>>,
}

impl Presentation {
    /// Invariant factors greater than one and the free rank, from the Smith
    /// form of the relation matrix.
    pub fn structure(&self) -> (usize, Vec<u64>) {
        let n = self.generators.len();
        let mut m: Vec<Vec<i64>> = self.relations.clone();
        let mut diag = Vec::new();
        let mut r = 0;
        while r < m.len() && r < n {
            let Some((pi, pj)) = (r..m.len())
                .flat_map(|i| (r..n).map(move |j| (i, j)))
                .filter(|&(i, j)| m[i][j] != 0)
                .min_by_key(|&(i, j)| m[i][j].abs())
            else {
                break;
            };
            m.swap(r, pi);
            for row in m.iter_mut() {
                row.swap(r, pj);
            }
            let p = m[r][r];
            let mut clean = true;
            for i in r + 1..m.len() {
                let q = m[i][r] / p;
                for j in r..n {
                    m[i][j] -= q * m[r][j];
                }
                clean &= m[i][r] == 0;
            }
            for j in r + 1..n {
                let q = m[r][j] / p;
                for i in r..m.len() {
                    m[i][j] -= q * m[i][r];
                }
                clean &= m[r][j] == 0;
            }
            if !clean {
                continue;
            }
            // fold in a row with an entry p does not divide, then retry
            if let Some(i) = (r + 1..m.len()).find(|&i| (r + 1..n).any(|j| m[i][j] % p != 0)) {
                for k in r..n {
                    m[r][k] += m[i][k];
                }
                continue;
            }
            diag.push(p.unsigned_abs());
            r += 1;
        }
        let torsion = diag.iter().copied().filter(|&d| d > 1).collect();
        (n - diag.len(), torsion)
    }

    pub fn free_rank(&self) -> usize {
        self.structure().0
    }

    pub fn torsion(&self) -> Vec<u64> {
        self.structure().1
    }
}

/// `H₁(W₀)`: free on the orbits, with the single relation `Σ m_c μ_c = 0` on
/// sphere pages.
pub fn h1_w0(f: &Factorization) -> Result<Presentation> {
    require_admissible(f)?;
    let relations = match f.page {
        PageShape::Disk => Vec::new(),
        PageShape::Sphere => vec![f.orbits.iter().map(|o| o.holes.len() as i64).collect()],
    };
    Ok(Presentation {
        generators: f.orbits.iter().map(|o| o.id.clone()).collect(),
        relations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologyClass {
    pub a: Vec<i64>,
    pub w: i64,
    pub context: u64,
}

impl HomologyClass {
    pub fn new(f: &Factorization, a: Vec<i64>, w: i64) -> Self {
        HomologyClass {
            a,
            w,
            context: f.context(),
        }
    }

    pub fn add(&self, other: &HomologyClass) -> Result<HomologyClass> {
        if self.context != other.context || self.a.len() != other.a.len() {
            return Err(Error::MixedContexts);
        }
        Ok(HomologyClass {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            w: self.w + other.w,
            context: self.context,
        })
    }

    /// Renders as `w·β + Σ a_i α_i` using the factorization's cycle ids.
    pub fn describe(&self, f: &Factorization) -> String {
        let mut out = String::new();
        let terms = std::iter::once((self.w, "beta".to_string()))
            .chain(self.a.iter().zip(&f.cycles).map(|(&c, cy)| (c, cy.id.clone())));
        for (c, name) in terms.filter(|&(c, _)| c != 0) {
            let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            out.push_str(&format!("{sign}{mag}{name}"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Whether `x` satisfies the winding condition of `f`.
pub fn kernel_contains(f: &Factorization, x: &HomologyClass) -> bool {
    if x.context != f.context() || x.a.len() != f.cycles.len() {
        return false;
    }
    if f.page == PageShape::Disk && x.w != 0 {
        return false;
    }
    let mut v = x.a.clone();
    if f.page == PageShape::Sphere {
        v.push(-x.w);
    }
    f.constraint_rows()
        .iter()
        .all(|row| row.iter().zip(&v).map(|(r, c)| r * c).sum::<i64>() == 0)
}

/// Integral basis of the kernel of `m` (columns are unknowns), from
/// unimodular column operations on `[m; I]`.
fn integer_kernel(m: &[Vec<i64>], cols: usize) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    // column j = (m[..][j], e_j)
    let mut c: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| {
            let mut v: Vec<BigInt> = m.iter().map(|r| BigInt::from(r[j])).collect();
            v.extend((0..cols).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            v
        })
        .collect();
    let mut piv = 0;
    for r in 0..rows {
        loop {
            let nz: Vec<usize> = (piv..cols).filter(|&j| !c[j][r].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    c.swap(piv, j);
                    piv += 1;
                }
                break;
            }
            let &j0 = nz.iter().min_by_key(|&&j| c[j][r].abs()).unwrap();
            for &j in &nz {
                if j == j0 {
                    continue;
                }
                let q = c[j][r].div_floor(&c[j0][r]);
                let src = c[j0].clone();
                for (x, s) in c[j].iter_mut().zip(&src) {
                    *x -= &q * s;
                }
            }
        }
    }
    c[piv..].iter().map(|v| v[rows..].to_vec()).collect()
}

/// A lattice basis of `H₂(W)` inside the span of the vanishing cycles.
pub fn h2_kernel(f: &Factorization) -> Result<Vec<HomologyClass>> {
    require_admissible(f)?;
    let k = f.cycles.len();
    let rows = f.constraint_rows();
    let width = rows.first().map_or(k + usize::from(f.page == PageShape::Sphere), Vec::len);
    let basis = integer_kernel(&rows, width);
    let ctx = f.context();
    basis
        .into_iter()
        .map(|v| {
            let mut v: Vec<i64> = v
                .iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::Internal("kernel entry overflow".into())))
                .collect::<Result<_>>()?;
            if v[..k].iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let w = if f.page == PageShape::Sphere { -v[k] } else { 0 };
            v.truncate(k);
            Ok(HomologyClass { a: v, w, context: ctx })
        })
        .collect()
}

/// Coordinates of `x` in `basis`, when it is an integral combination.
pub fn lattice_coordinates(basis: &[HomologyClass], x: &HomologyClass) -> Option<Vec<i64>> {
    if basis.iter().any(|b| b.context != x.context) {
        return None;
    }
    let row = |c: &HomologyClass, i: usize| if i < c.a.len() { c.a[i] } else { c.w };
    let dim = x.a.len() + 1;
    let a: Vec<Vec<Rational>> = (0..dim)
        .map(|i| basis.iter().map(|b| Rational::from_integer(row(b, i).into())).collect())
        .collect();
    let b: Vec<Rational> = (0..dim).map(|i| Rational::from_integer(row(x, i).into())).collect();
    if basis.is_empty() {
        return b.iter().all(Zero::is_zero).then(Vec::new);
    }
    let sol = solve(&a, &b)?;
    sol.iter().map(|c| c.is_integer().then(|| c.to_integer().to_i64()).flatten()).collect()
}

/// `−Σ a_i a_i'` for every pair.
pub fn intersection_form(classes: &[HomologyClass]) -> Result<Vec<Vec<i64>>> {
    if let Some(first) = classes.first() {
        if classes.iter().any(|c| c.context != first.context || c.a.len() != first.a.len()) {
            return Err(Error::MixedContexts);
        }
    }
    Ok(classes
        .iter()
        .map(|x| {
            classes
                .iter()
                .map(|y| -x.a.iter().zip(&y.a).map(|(p, q)| p * q).sum::<i64>())
                .collect()
        })
        .collect())
}

pub fn c1_evaluate(x: &HomologyClass) -> i64 {
    2 * x.w + x.a.iter().sum::<i64>()
}

/// Genus of a smooth symplectic representative from
/// `2w + Σ a_i + Σ a_i² = 2 − 2g`. Windings are 0 or 1 around each hole, so
/// `w < 0` has no representative; and a class with all `a_i ∈ {0, −1}` and
/// `w = 0` cannot be realized, which is exactly when the relation gives
/// `g = 1`. Only spheres survive.
pub fn adjunction_genus(x: &HomologyClass) -> Option<u64> {
    if x.w < 0 {
        return None;
    }
    let lhs = 2 * x.w + x.a.iter().map(|a| a + a * a).sum::<i64>();
    let two_g = 2 - lhs;
    (two_g == 0).then_some(0)
}

/// All kernel classes `α_j − Σ_I α_i` (`w = 0`) and, on sphere pages,
/// `−Σ_I α_i` (`w = 1`) of genus 0.
pub fn classify_sphere_classes(f: &Factorization) -> Result<Vec<HomologyClass>> {
    require_admissible(f)?;
    let k = f.cycles.len();
    if k > 24 {
        return Err(Error::BudgetExceeded(format!("{k} cycles")));
    }
    let ctx = f.context();
    let mut out = Vec::new();
    let mut consider = |a: Vec<i64>, w: i64| {
        let x = HomologyClass { a, w, context: ctx };
        if kernel_contains(f, &x) && adjunction_genus(&x) == Some(0) {
            out.push(x);
        }
    };
    for j in 0..k {
        for mask in 0u32..1 << (k - 1) {
            let mut a = vec![0i64; k];
            a[j] = 1;
            let others = (0..k).filter(|&i| i != j);
            for (bit, i) in others.enumerate() {
                if mask >> bit & 1 == 1 {
                    a[i] = -1;
                }
            }
            consider(a, 0);
        }
    }
    if f.page == PageShape::Sphere {
        for mask in 1u32..1 << k {
            let a = (0..k).map(|i| -((mask >> i & 1) as i64)).collect();
            consider(a, 1);
        }
    }
    Ok(out)
}

/// Whether the Gram matrix of `classes` equals the intersection matrix of `g`
/// after some relabeling of vertices.
pub fn match_plumbing(classes: &[HomologyClass], g: &PlumbingGraph) -> bool {
    let Ok(gram) = intersection_form(classes) else {
        return false;
    };
    matrices_isomorphic(&gram, &intersection_matrix(g).entries)
}

fn matrices_isomorphic(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    // per-row invariant: diagonal plus the sorted off-diagonal entries
    let sig = |m: &[Vec<i64>], i: usize| {
        let mut off: Vec<i64> = (0..n).filter(|&j| j != i).map(|j| m[i][j]).collect();
        off.sort_unstable();
        (m[i][i], off)
    };
    let sa: Vec<_> = (0..n).map(|i| sig(a, i)).collect();
    let sb: Vec<_> = (0..n).map(|i| sig(b, i)).collect();
    let count = |s: &[(i64, Vec<i64>)]| {
        let mut m = BTreeMap::new();
        for x in s {
            *m.entry(x.clone()).or_insert(0) += 1;
        }
        m
    };
    if count(&sa) != count(&sb) {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        i: usize,
        a: &[Vec<i64>],
        b: &[Vec<i64>],
        sa: &[(i64, Vec<i64>)],
        sb: &[(i64, Vec<i64>)],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == a.len() {
            return true;
        }
        for j in 0..b.len() {
            if used[j] || sa[i] != sb[j] || (0..i).any(|p| a[i][p] != b[j][map[p]]) {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if extend(i + 1, a, b, sa, sb, map, used) {
                return true;
            }
            used[j] = false;
        }
        false
    }
    extend(0, a, b, &sa, &sb, &mut map, &mut used)
}
