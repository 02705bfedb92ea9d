use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Opaque vertex token. Ids survive every move, so certificates can name
/// vertices of the original graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Ids must match `[A-Za-z0-9_]+` to round-trip through the text formats.
    pub fn is_well_formed(s: &str) -> bool {
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub framing: i64,
    pub genus: u32,
}

/// Strict transform arrowhead attached to a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub at: VertexId,
    pub multiplicity: u64,
}

/// Weighted simple graph with arrowheads. Vertices keep insertion order and
/// all algorithms address them by position; ids are resolved at the boundary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphData", try_from = "GraphData")]
pub struct PlumbingGraph {
    vertices: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
    arrows: Vec<Arrow>,
}

/// Serialized shape of a graph: edges are listed by id.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphData {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(default)]
    pub arrows: Vec<Arrow>,
}

impl From<PlumbingGraph> for GraphData {
    fn from(g: PlumbingGraph) -> Self {
        let edges = g
            .edges()
            .into_iter()
            .map(|(i, j)| (g.id(i).clone(), g.id(j).clone()))
            .collect();
        GraphData {
            edges,
            vertices: g.vertices,
            arrows: g.arrows,
        }
    }
}

impl TryFrom<GraphData> for PlumbingGraph {
    type Error = Error;

    fn try_from(d: GraphData) -> Result<Self> {
        let mut g = PlumbingGraph::new();
        for v in d.vertices {
            g.add_vertex_with_genus(v.id, v.framing, v.genus)?;
        }
        for (a, b) in d.edges {
            g.add_edge(a, b)?;
        }
        for a in d.arrows {
            g.add_arrow(a.at, a.multiplicity)?;
        }
        Ok(g)
    }
}

impl PlumbingGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from `(id, framing)` pairs and id edges.
    pub fn from_parts(vertices: &[(&str, i64)], edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = PlumbingGraph::new();
        for &(id, f) in vertices {
            g.add_vertex(id, f)?;
        }
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, id: impl Into<VertexId>, framing: i64) -> Result<usize> {
        self.add_vertex_with_genus(id, framing, 0)
    }

    pub fn add_vertex_with_genus(
        &mut self,
        id: impl Into<VertexId>,
        framing: i64,
        genus: u32,
    ) -> Result<usize> {
        let id = id.into();
        if self.index_of(&id).is_some() {
            return Err(Error::DuplicateId(id));
        }
        self.vertices.push(Vertex { id, framing, genus });
        self.adj.push(Vec::new());
        Ok(self.vertices.len() - 1)
    }

    pub fn add_edge(&mut self, a: impl Into<VertexId>, b: impl Into<VertexId>) -> Result<()> {
        let (a, b) = (a.into(), b.into());
        let i = self.require(&a)?;
        let j = self.require(&b)?;
        self.add_edge_idx(i, j)
    }

    pub fn add_edge_idx(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(self.vertices[i].id.clone()));
        }
        if self.has_edge(i, j) {
            return Err(Error::MultiEdge(
                self.vertices[i].id.clone(),
                self.vertices[j].id.clone(),
            ));
        }
        self.adj[i].push(j);
        self.adj[j].push(i);
        self.adj[i].sort_unstable();
        self.adj[j].sort_unstable();
        Ok(())
    }

    pub fn remove_edge_idx(&mut self, i: usize, j: usize) -> bool {
        let had = self.has_edge(i, j);
        self.adj[i].retain(|&x| x != j);
        self.adj[j].retain(|&x| x != i);
        had
    }

    pub fn add_arrow(&mut self, at: impl Into<VertexId>, multiplicity: u64) -> Result<()> {
        let at = at.into();
        self.require(&at)?;
        self.arrows.push(Arrow { at, multiplicity });
        Ok(())
    }

    /// Removes one arrow at `at` with the given multiplicity.
    pub fn remove_arrow(&mut self, at: &VertexId, multiplicity: u64) -> bool {
        match self
            .arrows
            .iter()
            .position(|a| &a.at == at && a.multiplicity == multiplicity)
        {
            Some(p) => {
                self.arrows.remove(p);
                true
            }
            None => false,
        }
    }

    pub fn clear_arrows(&mut self) {
        self.arrows.clear();
    }

    /// Removes a vertex together with its edges and arrows. Later positions
    /// shift down by one.
    pub fn remove_vertex(&mut self, i: usize) -> Vertex {
        let v = self.vertices.remove(i);
        self.adj.remove(i);
        for nbrs in &mut self.adj {
            nbrs.retain(|&x| x != i);
            for x in nbrs.iter_mut() {
                if *x > i {
                    *x -= 1;
                }
            }
        }
        self.arrows.retain(|a| a.at != v.id);
        v
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.vertices[i].id
    }

    pub fn ids(&self) -> Vec<VertexId> {
        self.vertices.iter().map(|v| v.id.clone()).collect()
    }

    pub fn framing(&self, i: usize) -> i64 {
        self.vertices[i].framing
    }

    pub fn framings(&self) -> Vec<i64> {
        self.vertices.iter().map(|v| v.framing).collect()
    }

    pub fn set_framing(&mut self, i: usize, framing: i64) {
        self.vertices[i].framing = framing;
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    /// Arrows at vertex `i`, in insertion order.
    pub fn arrows_at(&self, i: usize) -> impl Iterator<Item = &Arrow> {
        let id = &self.vertices[i].id;
        self.arrows.iter().filter(move |a| &a.at == id)
    }

    pub fn index_of(&self, id: &VertexId) -> Option<usize> {
        self.vertices.iter().position(|v| &v.id == id)
    }

    pub fn require(&self, id: &VertexId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::DanglingReference(id.clone()))
    }

    pub fn contains(&self, id: &VertexId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Edge degree; arrows are not counted.
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges as position pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.components().len() == self.len()
    }

    /// Connected with no cycles. The empty graph counts as a tree.
    pub fn is_tree(&self) -> bool {
        self.is_empty() || (self.is_connected() && self.edge_count() + 1 == self.len())
    }

    /// Vertex positions grouped by connected component, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Breadth-first order from `root`, with each vertex's parent.
    pub fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut order = vec![root];
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    order.push(w);
                }
            }
        }
        (order, parent)
    }

    /// A vertex minimizing the eccentricity; the smaller position on ties.
    pub fn center(&self) -> Option<usize> {
        (0..self.len()).min_by_key(|&v| {
            let (order, _) = self.bfs(v);
            let mut dist = vec![0usize; self.len()];
            let mut ecc = 0;
            for &x in &order {
                for &y in &self.adj[x] {
                    if y != v && dist[y] == 0 {
                        dist[y] = dist[x] + 1;
                        ecc = ecc.max(dist[y]);
                    }
                }
            }
            ecc
        })
    }

    pub fn require_genus_zero(&self) -> Result<()> {
        match self.vertices.iter().find(|v| v.genus != 0) {
            Some(v) => Err(Error::NonzeroGenus(v.id.clone())),
            None => Ok(()),
        }
    }

    pub fn require_tree(&self) -> Result<()> {
        self.require_genus_zero()?;
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if !self.is_tree() {
            return Err(Error::NotATree);
        }
        Ok(())
    }

    /// The smallest `{prefix}{k}` (k ≥ 1) not used as an id.
    pub fn fresh_id(&self, prefix: &str) -> VertexId {
        (1..)
            .map(|k| VertexId(format!("{prefix}{k}")))
            .find(|id| !self.contains(id))
            .unwrap()
    }

    /// Induced subgraph on `keep` (positions, any order; output keeps graph
    /// order). Arrows on kept vertices are retained.
    pub fn induced(&self, keep: &[usize]) -> PlumbingGraph {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut map = vec![usize::MAX; self.len()];
        let mut g = PlumbingGraph::new();
        for (new, &old) in sorted.iter().enumerate() {
            map[old] = new;
            g.vertices.push(self.vertices[old].clone());
            g.adj.push(Vec::new());
        }
        for (i, j) in self.edges() {
            if map[i] != usize::MAX && map[j] != usize::MAX {
                g.adj[map[i]].push(map[j]);
                g.adj[map[j]].push(map[i]);
            }
        }
        for nbrs in &mut g.adj {
            nbrs.sort_unstable();
        }
        g.arrows = self
            .arrows
            .iter()
            .filter(|a| g.contains(&a.at))
            .cloned()
            .collect();
        g
    }

    /// The same graph without arrows.
    pub fn without_arrows(&self) -> PlumbingGraph {
        let mut g = self.clone();
        g.arrows.clear();
        g
    }
}
