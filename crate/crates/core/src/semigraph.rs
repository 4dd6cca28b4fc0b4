//! Semi-graphs and combinatorial models of pointed stable curves.
//!
//! A [`SemiGraph`] is the dual semi-graph of a pointed stable curve: one
//! vertex per irreducible component, one closed edge per node (loops allowed
//! for self-intersections), one open edge per marked point. A [`CurveModel`]
//! decorates the graph with a genus and p-rank per vertex and the
//! characteristic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}
impl std::fmt::Debug for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v({})", self.0)
    }
}
impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}
impl std::fmt::Debug for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e({})", self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}
impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_string())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{0}` references missing vertex `{1}`")]
    MissingVertex(String, String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("loop-free part is not a tree; minimal paths are not unique")]
    NotLoopFreeTree,
    #[error("no path between `{0}` and `{1}`")]
    NoPath(String, String),
    #[error("vertex `{0}` violates stability: 2g - 2 + deg = {1}")]
    Unstable(String, i64),
    #[error("p-rank of `{0}` exceeds its genus")]
    PRankTooLarge(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SemiGraph {
    vertices: BTreeSet<VertexId>,
    /// closed edge -> unordered endpoints, stored sorted
    closed: BTreeMap<EdgeId, (VertexId, VertexId)>,
    /// open edge -> incident vertex
    open: BTreeMap<EdgeId, VertexId>,
}

impl SemiGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        closed: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
        open: impl IntoIterator<Item = (EdgeId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut vs = BTreeSet::new();
        for v in vertices {
            if !vs.insert(v.clone()) {
                return Err(GraphError::DuplicateVertex(v.0));
            }
        }
        if vs.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut cl = BTreeMap::new();
        let mut op = BTreeMap::new();
        for (e, a, b) in closed {
            for v in [&a, &b] {
                if !vs.contains(v) {
                    return Err(GraphError::MissingVertex(e.0.clone(), v.0.clone()));
                }
            }
            let ends = if a <= b { (a, b) } else { (b, a) };
            if cl.insert(e.clone(), ends).is_some() {
                return Err(GraphError::DuplicateEdge(e.0));
            }
        }
        for (e, v) in open {
            if !vs.contains(&v) {
                return Err(GraphError::MissingVertex(e.0.clone(), v.0.clone()));
            }
            if cl.contains_key(&e) || op.insert(e.clone(), v).is_some() {
                return Err(GraphError::DuplicateEdge(e.0));
            }
        }
        let g = SemiGraph { vertices: vs, closed: cl, open: op };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// The empty semi-graph. Only meaningful as the minimal quasi-tree of a
    /// curve without marked points; rejected everywhere else.
    pub fn empty() -> Self {
        SemiGraph { vertices: BTreeSet::new(), closed: BTreeMap::new(), open: BTreeMap::new() }
    }

    /// Constructor without the connectivity check, for covering totals,
    /// which are disconnected whenever the deck action has several orbits.
    /// Ids must still be consistent; panics on malformed input.
    pub(crate) fn new_unchecked(
        vertices: Vec<VertexId>,
        closed: Vec<(EdgeId, VertexId, VertexId)>,
        open: Vec<(EdgeId, VertexId)>,
    ) -> Self {
        let vs: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut cl = BTreeMap::new();
        for (e, a, b) in closed {
            assert!(vs.contains(&a) && vs.contains(&b), "dangling endpoint");
            let ends = if a <= b { (a, b) } else { (b, a) };
            assert!(cl.insert(e, ends).is_none(), "duplicate edge id");
        }
        let mut op = BTreeMap::new();
        for (e, v) in open {
            assert!(vs.contains(&v), "dangling endpoint");
            assert!(!cl.contains_key(&e) && op.insert(e, v).is_none(), "duplicate edge id");
        }
        SemiGraph { vertices: vs, closed: cl, open: op }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn closed_edges(&self) -> impl Iterator<Item = (&EdgeId, &(VertexId, VertexId))> {
        self.closed.iter()
    }

    pub fn closed_count(&self) -> usize {
        self.closed.len()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = (&EdgeId, &VertexId)> {
        self.open.iter()
    }

    pub fn open_count(&self) -> usize {
        self.open.len()
    }

    pub fn ends(&self, e: &EdgeId) -> Option<&(VertexId, VertexId)> {
        self.closed.get(e)
    }

    pub fn open_vertex(&self, e: &EdgeId) -> Option<&VertexId> {
        self.open.get(e)
    }

    pub fn is_loop(&self, e: &EdgeId) -> bool {
        self.closed.get(e).is_some_and(|(a, b)| a == b)
    }

    /// Closed edges whose two branches abut the same vertex.
    pub fn loop_edges(&self) -> BTreeSet<EdgeId> {
        self.closed
            .iter()
            .filter(|(_, (a, b))| a == b)
            .map(|(e, _)| e.clone())
            .collect()
    }

    /// Closed edges incident to `v` (loops included once).
    pub fn closed_at(&self, v: &VertexId) -> Vec<EdgeId> {
        self.closed
            .iter()
            .filter(|(_, (a, b))| a == v || b == v)
            .map(|(e, _)| e.clone())
            .collect()
    }

    pub fn open_at(&self, v: &VertexId) -> Vec<EdgeId> {
        self.open
            .iter()
            .filter(|(_, w)| *w == v)
            .map(|(e, _)| e.clone())
            .collect()
    }

    /// Number of half-edges at `v`: opens once, non-loop closed once, loops
    /// twice. This is `n_v` of the normalized component.
    pub fn degree(&self, v: &VertexId) -> usize {
        let mut d = self.open_at(v).len();
        for (a, b) in self.closed.values() {
            if a == v {
                d += 1;
            }
            if b == v {
                d += 1;
            }
        }
        d
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let start = self.vertices.iter().next().unwrap();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        while let Some(v) = queue.pop_front() {
            for (a, b) in self.closed.values() {
                let other = if a == &v {
                    b
                } else if b == &v {
                    a
                } else {
                    continue;
                };
                if seen.insert(other.clone()) {
                    queue.push_back(other.clone());
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// First Betti number `#closed - #vertices + 1`; open edges are ignored.
    /// Construction guarantees connectivity, on which the formula relies.
    pub fn betti_number(&self) -> usize {
        if self.vertices.is_empty() {
            return 0;
        }
        self.closed.len() + 1 - self.vertices.len()
    }

    /// True iff the graph minus its loops is a tree.
    pub fn loopless_is_tree(&self) -> bool {
        self.betti_number() == self.loop_edges().len()
    }

    /// The unique shortest path between two vertices when the loop-free part
    /// is a tree, as an alternating vertex/edge sequence.
    pub fn minimal_path(&self, v: &VertexId, w: &VertexId) -> Result<Vec<PathItem>, GraphError> {
        for x in [v, w] {
            if !self.vertices.contains(x) {
                return Err(GraphError::UnknownVertex(x.0.clone()));
            }
        }
        if !self.loopless_is_tree() {
            return Err(GraphError::NotLoopFreeTree);
        }
        if v == w {
            return Ok(vec![PathItem::Vertex(v.clone())]);
        }
        // BFS over non-loop closed edges
        let mut prev: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(v.clone());
        let mut seen = BTreeSet::new();
        seen.insert(v.clone());
        while let Some(u) = queue.pop_front() {
            for (e, (a, b)) in self.closed.iter() {
                if a == b {
                    continue;
                }
                let other = if a == &u {
                    b
                } else if b == &u {
                    a
                } else {
                    continue;
                };
                if seen.insert(other.clone()) {
                    prev.insert(other.clone(), (u.clone(), e.clone()));
                    queue.push_back(other.clone());
                }
            }
        }
        if !prev.contains_key(w) {
            return Err(GraphError::NoPath(v.0.clone(), w.0.clone()));
        }
        let mut items = vec![PathItem::Vertex(w.clone())];
        let mut cur = w.clone();
        while cur != *v {
            let (p, e) = prev[&cur].clone();
            items.push(PathItem::Edge(e));
            items.push(PathItem::Vertex(p.clone()));
            cur = p;
        }
        items.reverse();
        Ok(items)
    }

    /// Path length = number of vertices on the path minus one.
    pub fn path_length(path: &[PathItem]) -> usize {
        path.iter().filter(|i| matches!(i, PathItem::Vertex(_))).count() - 1
    }

    /// Rename vertices and edges through bijections; used by isomorphism
    /// tests and the cover construction.
    pub fn relabel(
        &self,
        vmap: &BTreeMap<VertexId, VertexId>,
        emap: &BTreeMap<EdgeId, EdgeId>,
    ) -> Result<Self, GraphError> {
        SemiGraph::new(
            self.vertices.iter().map(|v| vmap[v].clone()),
            self.closed
                .iter()
                .map(|(e, (a, b))| (emap[e].clone(), vmap[a].clone(), vmap[b].clone())),
            self.open.iter().map(|(e, v)| (emap[e].clone(), vmap[v].clone())),
        )
    }

    /// Graphviz rendering; open edges become point-shaped stubs.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for v in &self.vertices {
            s += &format!("  \"{v}\" [shape=circle];\n");
        }
        for (e, (a, b)) in &self.closed {
            s += &format!("  \"{a}\" -- \"{b}\" [label=\"{e}\"];\n");
        }
        for (e, v) in &self.open {
            s += &format!("  \"stub_{e}\" [shape=point, label=\"\"];\n");
            s += &format!("  \"{v}\" -- \"stub_{e}\" [label=\"{e}\", style=dashed];\n");
        }
        s += "}\n";
        s
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum PathItem {
    #[serde(rename = "vertex")]
    Vertex(VertexId),
    #[serde(rename = "edge")]
    Edge(EdgeId),
}

// ---------------------------------------------------------------------------

/// Dual semi-graph plus per-component genus, p-rank and the characteristic.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CurveModel {
    pub graph: SemiGraph,
    pub p: u64,
    genus: BTreeMap<VertexId, u64>,
    p_rank: BTreeMap<VertexId, u64>,
}

impl CurveModel {
    pub fn new(
        graph: SemiGraph,
        p: u64,
        genus: BTreeMap<VertexId, u64>,
        p_rank: Option<BTreeMap<VertexId, u64>>,
    ) -> Result<Self, GraphError> {
        Self::build(graph, p, genus, p_rank, false)
    }

    /// Accepts semi-stable vertices (2g - 2 + deg = 0), e.g. a genus-0
    /// component meeting the rest of the curve in exactly two points. Needed
    /// for loop models of types with `n = 0` that have no stable totally
    /// degenerate representative.
    pub fn new_semistable(
        graph: SemiGraph,
        p: u64,
        genus: BTreeMap<VertexId, u64>,
        p_rank: Option<BTreeMap<VertexId, u64>>,
    ) -> Result<Self, GraphError> {
        Self::build(graph, p, genus, p_rank, true)
    }

    fn build(
        graph: SemiGraph,
        p: u64,
        genus: BTreeMap<VertexId, u64>,
        p_rank: Option<BTreeMap<VertexId, u64>>,
        semistable: bool,
    ) -> Result<Self, GraphError> {
        if !crate::field::is_prime(p) {
            return Err(GraphError::NotPrime(p));
        }
        if graph.is_empty() {
            return Err(GraphError::Empty);
        }
        for v in genus.keys() {
            if !graph.has_vertex(v) {
                return Err(GraphError::UnknownVertex(v.0.clone()));
            }
        }
        let mut g_full = BTreeMap::new();
        for v in graph.vertices() {
            g_full.insert(v.clone(), *genus.get(v).unwrap_or(&0));
        }
        let sigma = match p_rank {
            Some(s) => {
                let mut full = BTreeMap::new();
                for v in graph.vertices() {
                    let sv = *s.get(v).unwrap_or(&g_full[v]);
                    if sv > g_full[v] {
                        return Err(GraphError::PRankTooLarge(v.0.clone()));
                    }
                    full.insert(v.clone(), sv);
                }
                full
            }
            None => g_full.clone(),
        };
        for v in graph.vertices() {
            let lhs = 2 * g_full[v] as i64 - 2 + graph.degree(v) as i64;
            let ok = if semistable { lhs >= 0 } else { lhs > 0 };
            if !ok {
                return Err(GraphError::Unstable(v.0.clone(), lhs));
            }
        }
        Ok(CurveModel { graph, p, genus: g_full, p_rank: sigma })
    }

    pub fn genus_of(&self, v: &VertexId) -> u64 {
        self.genus[v]
    }

    pub fn p_rank_of(&self, v: &VertexId) -> u64 {
        self.p_rank[v]
    }

    /// `g_X = sum g_v + r_X` — standard arithmetic genus of a nodal curve.
    pub fn total_genus(&self) -> u64 {
        self.genus.values().sum::<u64>() + self.graph.betti_number() as u64
    }

    /// `sigma_X = sum sigma_v + r_X`.
    pub fn total_p_rank(&self) -> u64 {
        self.p_rank.values().sum::<u64>() + self.graph.betti_number() as u64
    }

    pub fn n_marked(&self) -> usize {
        self.graph.open_count()
    }

    pub fn is_totally_degenerate(&self) -> bool {
        self.genus.values().all(|&g| g == 0)
    }

    pub fn from_json(s: &str) -> Result<Self, CurveFileError> {
        let file: CurveFile = serde_json::from_str(s)?;
        file.try_into().map_err(CurveFileError::Graph)
    }

    pub fn to_json(&self) -> String {
        let file = CurveFile {
            p: self.p,
            vertices: self
                .graph
                .vertices()
                .map(|v| VertexEntry {
                    id: v.0.clone(),
                    genus: self.genus[v],
                    p_rank: Some(self.p_rank[v]),
                })
                .collect(),
            closed_edges: self
                .graph
                .closed_edges()
                .map(|(e, (a, b))| ClosedEntry { id: e.0.clone(), ends: [a.0.clone(), b.0.clone()] })
                .collect(),
            open_edges: self
                .graph
                .open_edges()
                .map(|(e, v)| OpenEntry { id: e.0.clone(), vertex: v.0.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[derive(Debug, Error)]
pub enum CurveFileError {
    #[error("malformed curve file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// On-disk schema. Unknown keys are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub p: u64,
    pub vertices: Vec<VertexEntry>,
    #[serde(default)]
    pub closed_edges: Vec<ClosedEntry>,
    #[serde(default)]
    pub open_edges: Vec<OpenEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub genus: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rank: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedEntry {
    pub id: String,
    pub ends: [String; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenEntry {
    pub id: String,
    pub vertex: String,
}

impl TryFrom<CurveFile> for CurveModel {
    type Error = GraphError;
    fn try_from(f: CurveFile) -> Result<Self, GraphError> {
        let graph = SemiGraph::new(
            f.vertices.iter().map(|v| VertexId(v.id.clone())),
            f.closed_edges
                .iter()
                .map(|e| (EdgeId(e.id.clone()), VertexId(e.ends[0].clone()), VertexId(e.ends[1].clone()))),
            f.open_edges
                .iter()
                .map(|e| (EdgeId(e.id.clone()), VertexId(e.vertex.clone()))),
        )?;
        let genus = f.vertices.iter().map(|v| (VertexId(v.id.clone()), v.genus)).collect();
        let p_rank: BTreeMap<VertexId, u64> = f
            .vertices
            .iter()
            .filter_map(|v| v.p_rank.map(|s| (VertexId(v.id.clone()), s)))
            .collect();
        CurveModel::new(graph, f.p, genus, if p_rank.is_empty() { None } else { Some(p_rank) })
    }
}

// ---------------------------------------------------------------------------
