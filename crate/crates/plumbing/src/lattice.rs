//! Intersection lattices: exact definiteness, null generators and solves.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::{PlumbingGraph, VertexId};
use crate::scalar::ExactField;
use crate::{Error, Rational, Result};

/// Symmetric integer matrix indexed by vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionMatrix {
    pub ids: Vec<VertexId>,
    pub entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn from_entries(entries: Vec<Vec<i64>>) -> Self {
        let ids = (0..entries.len())
            .map(|i| VertexId::new(format!("x{i}")))
            .collect();
        IntersectionMatrix { ids, entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| self.entries[i].len() == n && (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// `xᵀ Q y` for integer vectors.
    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let n = self.size();
        let mut s = 0;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                s += x[i] * self.entries[i][j] * y[j];
            }
        }
        s
    }

    /// `Q x`.
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_field<F: ExactField>(&self) -> Vec<Vec<F>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&v| F::from_i64(v)).collect())
            .collect()
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&self.entries)
    }
}

pub fn intersection_matrix(g: &PlumbingGraph) -> IntersectionMatrix {
    let n = g.len();
    let mut entries = vec![vec![0i64; n]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        row[i] = g.framing(i);
    }
    for (i, j) in g.edges() {
        entries[i][j] = 1;
        entries[j][i] = 1;
    }
    IntersectionMatrix {
        ids: g.ids(),
        entries,
    }
}

/// Integer coefficients on vertices; absent ids read as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Divisor(pub BTreeMap<VertexId, i64>);

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &VertexId) -> i64 {
        self.0.get(id).copied().unwrap_or(0)
    }

    pub fn set(&mut self, id: impl Into<VertexId>, v: i64) {
        self.0.insert(id.into(), v);
    }

    /// Coefficients in graph order; errors if the support leaves the graph.
    pub fn to_vec(&self, g: &PlumbingGraph) -> Result<Vec<i64>> {
        for id in self.0.keys() {
            g.require(id)?;
        }
        Ok(g.vertices().iter().map(|v| self.get(&v.id)).collect())
    }

    pub fn from_vec(g: &PlumbingGraph, coeffs: &[i64]) -> Self {
        Divisor(
            g.vertices()
                .iter()
                .zip(coeffs)
                .map(|(v, &c)| (v.id.clone(), c))
                .collect(),
        )
    }

    pub fn restrict(&self, keep: &[VertexId]) -> Self {
        Divisor(
            keep.iter()
                .map(|id| (id.clone(), self.get(id)))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefinitenessClass {
    NegativeDefinite,
    NegativeSemidefinite,
    Other,
}

/// `nullity` is always `n - rank`, so a nonsingular indefinite form reports
/// class `Other` with nullity 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitenessReport {
    pub class: DefinitenessClass,
    pub nullity: usize,
    pub null_generator: Option<Vec<i64>>,
}

impl DefinitenessReport {
    pub fn is_negative_definite(&self) -> bool {
        self.class == DefinitenessClass::NegativeDefinite
    }
}

/// Sign class of a symmetric form over an exact field, by symmetric
/// elimination on negative diagonal pivots.
pub fn classify_form<F: ExactField>(mut a: Vec<Vec<F>>) -> DefinitenessClass {
    let n = a.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut singular = false;
    while !active.is_empty() {
        if let Some(pos) = active.iter().position(|&i| a[i][i].is_negative()) {
            let p = active.remove(pos);
            let piv = a[p][p].clone();
            for &j in &active {
                if a[j][p].is_zero() {
                    continue;
                }
                let f = a[j][p].clone() / piv.clone();
                for &k in &active {
                    if !a[p][k].is_zero() {
                        let d = f.clone() * a[p][k].clone();
                        a[j][k] = a[j][k].clone() - d;
                    }
                }
            }
            continue;
        }
        if active.iter().any(|&i| a[i][i].is_positive()) {
            return DefinitenessClass::Other;
        }
        // all remaining diagonal entries vanish
        if active
            .iter()
            .any(|&i| active.iter().any(|&j| !a[i][j].is_zero()))
        {
            return DefinitenessClass::Other;
        }
        singular = true;
        break;
    }
    if singular {
        DefinitenessClass::NegativeSemidefinite
    } else {
        DefinitenessClass::NegativeDefinite
    }
}

/// Row echelon rank over an exact field.
pub fn rank<F: ExactField>(mut a: Vec<Vec<F>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone() / a[r][c].clone();
            for k in c..cols {
                let d = f.clone() * a[r][k].clone();
                a[i][k] = a[i][k].clone() - d;
            }
        }
        r += 1;
    }
    r
}

/// Basis of the right kernel, one vector per free column.
pub fn kernel<F: ExactField>(mut a: Vec<Vec<F>>, cols: usize) -> Vec<Vec<F>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = F::one() / a[r][c].clone();
        for k in 0..cols {
            a[r][k] = a[r][k].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for k in 0..cols {
                let d = f.clone() * a[r][k].clone();
                a[i][k] = a[i][k].clone() - d;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![F::zero(); cols];
            v[fc] = F::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][fc].clone();
            }
            v
        })
        .collect()
}

/// Solves `a x = b`; free variables are set to zero.
pub fn solve<F: ExactField>(a: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = F::one() / m[r][c].clone();
        for k in 0..=cols {
            m[r][k] = m[r][k].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for k in 0..=cols {
                let d = f.clone() * m[r][k].clone();
                m[i][k] = m[i][k].clone() - d;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![F::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = m[row][cols].clone();
    }
    Some(x)
}

/// Scales a rational vector to a primitive integer vector. All-nonpositive
/// vectors are flipped; otherwise the first nonzero entry is made positive.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if !g.is_zero() {
        for x in &mut ints {
            *x /= &g;
        }
    }
    let flip = if ints.iter().all(|x| !x.is_positive()) {
        true
    } else if ints.iter().all(|x| !x.is_negative()) {
        false
    } else {
        ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative())
    };
    if flip {
        for x in &mut ints {
            *x = -x.clone();
        }
    }
    ints
}

/// Leading minors of `−q` by fraction-free elimination in `i128`. `None` when
/// an intermediate overflows.
fn leading_minors_positive(q: &[Vec<i64>]) -> Option<bool> {
    let n = q.len();
    let mut a: Vec<Vec<i128>> = q.iter().map(|r| r.iter().map(|&x| -(x as i128)).collect()).collect();
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] <= 0 {
            return Some(false);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    Some(true)
}

pub fn is_negative_definite(q: &IntersectionMatrix) -> bool {
    leading_minors_positive(&q.entries)
        .unwrap_or_else(|| classify_form::<Rational>(q.to_field()) == DefinitenessClass::NegativeDefinite)
}

pub fn classify_definiteness(q: &IntersectionMatrix) -> DefinitenessReport {
    if leading_minors_positive(&q.entries) == Some(true) {
        return DefinitenessReport {
            class: DefinitenessClass::NegativeDefinite,
            nullity: 0,
            null_generator: None,
        };
    }
    let a: Vec<Vec<Rational>> = q.to_field();
    let n = q.size();
    let class = classify_form(a.clone());
    let nullity = n - rank(a.clone());
    let null_generator = if class == DefinitenessClass::NegativeSemidefinite && nullity == 1 {
        let k = kernel(a, n);
        let v = primitive_integer(&k[0]);
        Some(
            v.iter()
                .map(|x| x.to_i64().expect("null generator entry exceeds i64"))
                .collect(),
        )
    } else {
        None
    };
    DefinitenessReport {
        class,
        nullity,
        null_generator,
    }
}

pub fn solve_q(q: &IntersectionMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if b.len() != q.size() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has size {}",
            b.len(),
            q.size()
        )));
    }
    solve(&q.to_field::<Rational>(), b).ok_or(Error::SingularInconsistent)
}

/// Bareiss fraction-free determinant.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}
