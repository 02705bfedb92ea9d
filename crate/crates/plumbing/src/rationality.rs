//! Laufer's computation sequence and the Lipman cone.

use serde::{Deserialize, Serialize};

use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::{classify_definiteness, intersection_matrix, Divisor, IntersectionMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LauferStep {
    pub vertex: VertexId,
    /// `Z_k · E_v` just before `E_v` is added.
    pub pairing: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LauferTrace {
    pub start: VertexId,
    pub steps: Vec<LauferStep>,
    pub fundamental_cycle: Divisor,
    pub rational: bool,
    /// Index into `steps` of the first pairing ≥ 2.
    pub violation: Option<usize>,
}

/// Laufer's sequence from `start` (smallest id if absent), adding the
/// positively paired vertex with the smallest id at each step.
pub fn fundamental_cycle(g: &PlumbingGraph, start: Option<&VertexId>) -> Result<LauferTrace> {
    fundamental_cycle_by(g, start, |g, cands| {
        *cands.iter().min_by_key(|&&i| g.id(i)).unwrap()
    })
}

/// Laufer's sequence with a caller-chosen tie-break among the vertices that
/// currently pair positively with `Z_k`.
pub fn fundamental_cycle_by(
    g: &PlumbingGraph,
    start: Option<&VertexId>,
    mut pick: impl FnMut(&PlumbingGraph, &[usize]) -> usize,
) -> Result<LauferTrace> {
    g.require_genus_zero()?;
    if g.is_empty() || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    let q = intersection_matrix(g);
    if !classify_definiteness(&q).is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    let s = match start {
        Some(id) => g.require(id)?,
        None => (0..g.len()).min_by_key(|&i| g.id(i)).unwrap(),
    };
    let n = g.len();
    let mut z = vec![0i64; n];
    z[s] = 1;
    let mut pairing = q.entries[s].clone();
    let mut steps = Vec::new();
    loop {
        let cands: Vec<usize> = (0..n).filter(|&v| pairing[v] > 0).collect();
        if cands.is_empty() {
            break;
        }
        let v = pick(g, &cands);
        assert!(pairing[v] > 0, "tie-break picked a non-candidate");
        steps.push(LauferStep {
            vertex: g.id(v).clone(),
            pairing: pairing[v],
        });
        z[v] += 1;
        for (w, p) in pairing.iter_mut().enumerate() {
            *p += q.entries[v][w];
        }
    }
    let violation = steps.iter().position(|s| s.pairing >= 2);
    Ok(LauferTrace {
        start: g.id(s).clone(),
        rational: violation.is_none(),
        violation,
        steps,
        fundamental_cycle: Divisor::from_vec(g, &z),
    })
}

pub fn check_rational(g: &PlumbingGraph) -> Result<bool> {
    Ok(fundamental_cycle(g, None)?.rational)
}

/// All coefficients positive and `D · E_v ≤ 0` everywhere.
pub fn lipman_cone_check(g: &PlumbingGraph, d: &Divisor) -> bool {
    let Ok(x) = d.to_vec(g) else {
        return false;
    };
    x.iter().all(|&c| c > 0) && in_dual_cone(&intersection_matrix(g), &x)
}

fn in_dual_cone(q: &IntersectionMatrix, x: &[i64]) -> bool {
    q.apply(x).iter().all(|&p| p <= 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d4() -> PlumbingGraph {
        PlumbingGraph::from_parts(
            &[("c", -2), ("a", -2), ("b", -2), ("d", -2)],
            &[("c", "a"), ("c", "b"), ("c", "d")],
        )
        .unwrap()
    }

    #[test]
    fn single_vertex() {
        for n in 1..5 {
            let mut g = PlumbingGraph::new();
            g.add_vertex("v", -n).unwrap();
            let t = fundamental_cycle(&g, None).unwrap();
            assert!(t.rational && t.steps.is_empty());
            assert_eq!(t.fundamental_cycle.get(&"v".into()), 1);
        }
    }

    #[test]
    fn d4_cycle() {
        let g = d4();
        let t = fundamental_cycle(&g, None).unwrap();
        assert!(t.rational);
        assert_eq!(t.fundamental_cycle.to_vec(&g).unwrap(), vec![2, 1, 1, 1]);
        assert!(lipman_cone_check(&g, &t.fundamental_cycle));
        let ones = Divisor::from_vec(&g, &[1, 1, 1, 1]);
        assert!(!lipman_cone_check(&g, &ones));
        let zero = Divisor::from_vec(&g, &[2, 0, 1, 1]);
        assert!(!lipman_cone_check(&g, &zero));
    }

    #[test]
    fn triangle_is_not_rational() {
        let g = PlumbingGraph::from_parts(
            &[("c", -1), ("a", -3), ("b", -4), ("d", -4)],
            &[("c", "a"), ("c", "b"), ("c", "d")],
        )
        .unwrap();
        let t = fundamental_cycle(&g, None).unwrap();
        assert!(!t.rational);
        let k = t.violation.unwrap();
        assert_eq!(t.steps[k].pairing, 2);
    }

    #[test]
    fn preconditions() {
        let g = PlumbingGraph::from_parts(&[("a", -1), ("b", -1)], &[("a", "b")]).unwrap();
        assert_eq!(fundamental_cycle(&g, None), Err(Error::NotNegativeDefinite));
        let g = PlumbingGraph::from_parts(&[("a", -2), ("b", -2)], &[]).unwrap();
        assert_eq!(fundamental_cycle(&g, None), Err(Error::Disconnected));
    }
}
