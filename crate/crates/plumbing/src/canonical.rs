//! Canonical encodings of weighted forests, used as memo keys and for
//! isomorphism tests.

use crate::graph::PlumbingGraph;

const OPEN: i64 = i64::MIN;
const CLOSE: i64 = i64::MIN + 1;

/// Token string identifying the labeled forest up to isomorphism. Labels are
/// framing, genus and the sorted arrow multiplicities. `None` for graphs with
/// cycles.
pub fn canonical_form(g: &PlumbingGraph) -> Option<Vec<i64>> {
    if !g.is_forest() {
        return None;
    }
    let labels: Vec<Vec<i64>> = (0..g.len())
        .map(|i| {
            let mut arrows: Vec<i64> = g.arrows_at(i).map(|a| a.multiplicity as i64).collect();
            arrows.sort_unstable();
            let mut l = vec![g.framing(i), g.vertex(i).genus as i64, arrows.len() as i64];
            l.extend(arrows);
            l
        })
        .collect();
    let mut comps: Vec<Vec<i64>> = g
        .components()
        .iter()
        .map(|c| tree_code(g, &labels, c))
        .collect();
    comps.sort();
    Some(comps.concat())
}

fn tree_code(g: &PlumbingGraph, labels: &[Vec<i64>], comp: &[usize]) -> Vec<i64> {
    centers(g, comp)
        .into_iter()
        .map(|c| encode(g, labels, c, usize::MAX))
        .min()
        .unwrap()
}

fn encode(g: &PlumbingGraph, labels: &[Vec<i64>], v: usize, parent: usize) -> Vec<i64> {
    let mut kids: Vec<Vec<i64>> = g
        .neighbors(v)
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| encode(g, labels, w, v))
        .collect();
    kids.sort();
    let mut out = vec![OPEN];
    out.extend_from_slice(&labels[v]);
    for k in kids {
        out.extend(k);
    }
    out.push(CLOSE);
    out
}

/// One or two centers of a tree component, found by peeling leaves.
fn centers(g: &PlumbingGraph, comp: &[usize]) -> Vec<usize> {
    if comp.len() <= 2 {
        return comp.to_vec();
    }
    let mut deg: Vec<usize> = (0..g.len()).map(|i| g.degree(i)).collect();
    let mut layer: Vec<usize> = comp.iter().copied().filter(|&v| deg[v] <= 1).collect();
    let mut remaining = comp.len();
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in g.neighbors(v) {
                if deg[w] > 1 {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Whether two forests are isomorphic as labeled graphs.
pub fn isomorphic(a: &PlumbingGraph, b: &PlumbingGraph) -> bool {
    match (canonical_form(a), canonical_form(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabeling_preserves_code() {
        let a = PlumbingGraph::from_parts(
            &[("x", -2), ("y", -3), ("z", -2), ("w", -5)],
            &[("x", "y"), ("y", "z"), ("z", "w")],
        )
        .unwrap();
        let b = PlumbingGraph::from_parts(
            &[("p", -5), ("q", -2), ("r", -3), ("s", -2)],
            &[("p", "q"), ("q", "r"), ("r", "s")],
        )
        .unwrap();
        assert!(isomorphic(&a, &b));
        let c = PlumbingGraph::from_parts(
            &[("p", -5), ("q", -3), ("r", -2), ("s", -2)],
            &[("p", "q"), ("q", "r"), ("r", "s")],
        )
        .unwrap();
        assert!(!isomorphic(&a, &c));
    }

    #[test]
    fn bicentral_path() {
        let a = PlumbingGraph::from_parts(&[("a", -1), ("b", -2)], &[("a", "b")]).unwrap();
        let b = PlumbingGraph::from_parts(&[("a", -2), ("b", -1)], &[("a", "b")]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn cycles_have_no_code() {
        let g = PlumbingGraph::from_parts(
            &[("a", -2), ("b", -2), ("c", -2)],
            &[("a", "b"), ("b", "c"), ("c", "a")],
        )
        .unwrap();
        assert_eq!(canonical_form(&g), None);
    }
}
