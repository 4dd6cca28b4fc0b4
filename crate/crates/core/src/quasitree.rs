//! Minimal quasi-trees.
//!
//! Starting from a connected semi-graph with marked points, cut a set `E` of
//! non-loop closed edges whose removal (together with all loops) leaves a
//! spanning tree, normalize each cut node into a pair of open edges, then
//! repeatedly delete terminal vertices carrying no original marked point,
//! turning severed nodes into new open edges. The fixpoint is a tree-with-
//! loops that still carries every original marked point. Re-gluing the
//! surviving normalization pairs gives the image graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::semigraph::{CurveModel, EdgeId, GraphError, SemiGraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuasiTreeError {
    #[error("hint contains a loop or unknown closed edge `{0}`")]
    BadHintEdge(String),
    #[error("removing the hint does not leave a spanning tree")]
    HintNotCotree,
    #[error("normalization set contains a loop or open edge `{0}`")]
    BadNormalizeEdge(String),
    #[error("loop-free part is not a tree")]
    NotTree,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Outcome of the minimal quasi-tree construction.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiTreeResult {
    /// the minimal quasi-tree; empty when the input has no marked points
    pub gamma: SemiGraph,
    /// inherited per-vertex genus for the surviving vertices
    pub genus: BTreeMap<VertexId, u64>,
    pub p_rank: BTreeMap<VertexId, u64>,
    /// closed edges cut at step one
    pub selected_e: BTreeSet<EdgeId>,
    /// vertex sets deleted per pruning round
    pub pruned: Vec<BTreeSet<VertexId>>,
    /// open edges of gamma that sever nodes outside the normalization set,
    /// or normalization halves whose partner was pruned
    pub d_e1: BTreeSet<EdgeId>,
    /// surviving normalization pairs, re-glued in the image
    pub d_e2: BTreeSet<EdgeId>,
    /// pairs (edge, half at smaller endpoint, half at larger endpoint)
    pub pairs: Vec<(EdgeId, EdgeId, EdgeId)>,
    /// the image graph
    pub image: SemiGraph,
}

/// A cotree choice: a set of non-loop closed edges whose removal, together
/// with all loops, leaves a spanning tree. With a hint, validates it;
/// otherwise returns the complement of the lexicographic-BFS spanning tree.
pub fn select_e(
    g: &SemiGraph,
    hint: Option<&BTreeSet<EdgeId>>,
) -> Result<BTreeSet<EdgeId>, QuasiTreeError> {
    let loops = g.loop_edges();
    if let Some(hint) = hint {
        for e in hint {
            if g.ends(e).is_none() || loops.contains(e) {
                return Err(QuasiTreeError::BadHintEdge(e.0.clone()));
            }
        }
        let kept: Vec<(EdgeId, VertexId, VertexId)> = g
            .closed_edges()
            .filter(|(e, _)| !hint.contains(e) && !loops.contains(e))
            .map(|(e, (a, b))| (e.clone(), a.clone(), b.clone()))
            .collect();
        if !spans_as_tree(g, &kept) {
            return Err(QuasiTreeError::HintNotCotree);
        }
        return Ok(hint.clone());
    }
    // lexicographic BFS from the smallest vertex, scanning edges in id order
    let mut tree: BTreeSet<EdgeId> = BTreeSet::new();
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let start = g.vertices().next().expect("non-empty").clone();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for e in g.closed_at(&v) {
            let (a, b) = g.ends(&e).unwrap().clone();
            if a == b {
                continue;
            }
            let other = if a == v { b } else { a };
            if seen.insert(other.clone()) {
                tree.insert(e.clone());
                queue.push_back(other);
            }
        }
    }
    Ok(g.closed_edges()
        .filter(|(e, (a, b))| a != b && !tree.contains(e))
        .map(|(e, _)| e.clone())
        .collect())
}

fn spans_as_tree(g: &SemiGraph, kept: &[(EdgeId, VertexId, VertexId)]) -> bool {
    // connected and acyclic on the full vertex set
    let nv = g.vertex_count();
    if kept.len() + 1 != nv {
        return false;
    }
    let index: BTreeMap<&VertexId, usize> = g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
    let mut dsu: Vec<usize> = (0..nv).collect();
    fn find(dsu: &mut [usize], mut x: usize) -> usize {
        while dsu[x] != x {
            dsu[x] = dsu[dsu[x]];
            x = dsu[x];
        }
        x
    }
    for (_, a, b) in kept {
        let (ra, rb) = (find(&mut dsu, index[a]), find(&mut dsu, index[b]));
        if ra == rb {
            return false;
        }
        dsu[ra] = rb;
    }
    true
}

/// Replace each edge of `E` by two open edges, one at each former endpoint.
/// The half at the lexicographically smaller endpoint gets suffix `.1`.
/// May disconnect in general; the caller guards via [`select_e`].
pub fn normalize_at(g: &SemiGraph, e_set: &BTreeSet<EdgeId>) -> Result<SemiGraph, QuasiTreeError> {
    for e in e_set {
        if g.ends(e).is_none() || g.is_loop(e) {
            return Err(QuasiTreeError::BadNormalizeEdge(e.0.clone()));
        }
    }
    let mut closed: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
    let mut open: Vec<(EdgeId, VertexId)> = g
        .open_edges()
        .map(|(e, v)| (e.clone(), v.clone()))
        .collect();
    let taken: BTreeSet<EdgeId> = g
        .closed_edges()
        .map(|(e, _)| e.clone())
        .chain(g.open_edges().map(|(e, _)| e.clone()))
        .collect();
    for (e, (a, b)) in g.closed_edges() {
        if e_set.contains(e) {
            let (h1, h2) = half_names(&taken, e);
            open.push((h1, a.clone()));
            open.push((h2, b.clone()));
        } else {
            closed.push((e.clone(), a.clone(), b.clone()));
        }
    }
    SemiGraph::new(g.vertices().cloned(), closed, open).map_err(Into::into)
}

fn half_names(taken: &BTreeSet<EdgeId>, e: &EdgeId) -> (EdgeId, EdgeId) {
    let mut stem = format!("{}.", e.0);
    loop {
        let h1 = EdgeId(format!("{stem}1"));
        let h2 = EdgeId(format!("{stem}2"));
        if !taken.contains(&h1) && !taken.contains(&h2) {
            return (h1, h2);
        }
        stem.push('_');
    }
}

/// Vertices incident to exactly one non-loop closed edge and to none of the
/// protected open edges.
pub fn terminal_vertices_avoiding(
    g: &SemiGraph,
    protected: &BTreeSet<EdgeId>,
) -> Result<BTreeSet<VertexId>, QuasiTreeError> {
    if !g.loopless_is_tree() {
        return Err(QuasiTreeError::NotTree);
    }
    let mut out = BTreeSet::new();
    for v in g.vertices() {
        let tree_deg = g.closed_at(v).iter().filter(|e| !g.is_loop(e)).count();
        let has_protected = g.open_at(v).iter().any(|e| protected.contains(e));
        if tree_deg == 1 && !has_protected {
            out.insert(v.clone());
        }
    }
    Ok(out)
}

/// Runs the full construction on a curve model.
pub fn minimal_quasi_tree(
    c: &CurveModel,
    hint: Option<&BTreeSet<EdgeId>>,
) -> Result<QuasiTreeResult, QuasiTreeError> {
    let g = &c.graph;
    if g.open_count() == 0 {
        return Ok(QuasiTreeResult {
            gamma: SemiGraph::empty(),
            genus: BTreeMap::new(),
            p_rank: BTreeMap::new(),
            selected_e: BTreeSet::new(),
            pruned: Vec::new(),
            d_e1: BTreeSet::new(),
            d_e2: BTreeSet::new(),
            pairs: Vec::new(),
            image: SemiGraph::empty(),
        });
    }
    let protected: BTreeSet<EdgeId> = g.open_edges().map(|(e, _)| e.clone()).collect();
    let selected = select_e(g, hint)?;
    let mut cur = normalize_at(g, &selected)?;
    // track the half names created for each cut edge
    let mut pair_list: Vec<(EdgeId, EdgeId, EdgeId)> = Vec::new();
    {
        let fresh: BTreeSet<EdgeId> = cur
            .open_edges()
            .map(|(e, _)| e.clone())
            .filter(|e| !protected.contains(e))
            .collect();
        for e in &selected {
            let mut halves: Vec<EdgeId> = fresh
                .iter()
                .filter(|h| {
                    h.0.strip_prefix(&format!("{}.", e.0))
                        .is_some_and(|s| s.trim_start_matches('_').len() == 1)
                })
                .cloned()
                .collect();
            halves.sort();
            debug_assert_eq!(halves.len(), 2, "two halves per cut edge");
            pair_list.push((e.clone(), halves[0].clone(), halves[1].clone()));
        }
    }

    let mut pruned_rounds: Vec<BTreeSet<VertexId>> = Vec::new();
    loop {
        let victims = terminal_vertices_avoiding(&cur, &protected)?;
        if victims.is_empty() {
            break;
        }
        cur = prune(&cur, &victims);
        pruned_rounds.push(victims);
    }

    // classify the extra opens of gamma
    let gamma_opens: BTreeSet<EdgeId> = cur.open_edges().map(|(e, _)| e.clone()).collect();
    let mut d_e2: BTreeSet<EdgeId> = BTreeSet::new();
    let mut surviving_pairs: Vec<(EdgeId, EdgeId, EdgeId)> = Vec::new();
    for (e, h1, h2) in &pair_list {
        if gamma_opens.contains(h1) && gamma_opens.contains(h2) {
            d_e2.insert(h1.clone());
            d_e2.insert(h2.clone());
            surviving_pairs.push((e.clone(), h1.clone(), h2.clone()));
        }
    }
    let d_e1: BTreeSet<EdgeId> = gamma_opens
        .iter()
        .filter(|e| !protected.contains(*e) && !d_e2.contains(*e))
        .cloned()
        .collect();

    // image: re-glue the surviving pairs into closed edges under their
    // original ids; unpaired halves are forgotten
    let image = {
        let mut closed: Vec<(EdgeId, VertexId, VertexId)> = cur
            .closed_edges()
            .map(|(e, (a, b))| (e.clone(), a.clone(), b.clone()))
            .collect();
        let mut open: Vec<(EdgeId, VertexId)> = Vec::new();
        for (e, v) in cur.open_edges() {
            if !d_e2.contains(e) {
                open.push((e.clone(), v.clone()));
            }
        }
        for (e, h1, h2) in &surviving_pairs {
            let v1 = cur.open_vertex(h1).unwrap().clone();
            let v2 = cur.open_vertex(h2).unwrap().clone();
            closed.push((e.clone(), v1, v2));
        }
        SemiGraph::new(cur.vertices().cloned(), closed, open)?
    };

    let genus: BTreeMap<VertexId, u64> =
        cur.vertices().map(|v| (v.clone(), c.genus_of(v))).collect();
    let p_rank: BTreeMap<VertexId, u64> =
        cur.vertices().map(|v| (v.clone(), c.p_rank_of(v))).collect();

    Ok(QuasiTreeResult {
        gamma: cur,
        genus,
        p_rank,
        selected_e: selected,
        pruned: pruned_rounds,
        d_e1,
        d_e2,
        pairs: surviving_pairs,
        image,
    })
}

/// Delete a vertex set; closed edges from a survivor into the deleted set
/// become open edges at the survivor under the same id. Loops and edges
/// inside the deleted set vanish, as do its open edges.
fn prune(g: &SemiGraph, victims: &BTreeSet<VertexId>) -> SemiGraph {
    let mut closed: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
    let mut open: Vec<(EdgeId, VertexId)> = Vec::new();
    for (e, v) in g.open_edges() {
        if !victims.contains(v) {
            open.push((e.clone(), v.clone()));
        }
    }
    for (e, (a, b)) in g.closed_edges() {
        match (victims.contains(a), victims.contains(b)) {
            (false, false) => closed.push((e.clone(), a.clone(), b.clone())),
            (false, true) => open.push((e.clone(), a.clone())),
            (true, false) => open.push((e.clone(), b.clone())),
            (true, true) => {}
        }
    }
    SemiGraph::new(
        g.vertices().filter(|v| !victims.contains(*v)).cloned(),
        closed,
        open,
    )
    .expect("pruning terminal vertices of a tree keeps it connected")
}

/// The quasi-tree as a curve model with inherited genera. Degrees are
/// preserved by normalization and pruning, so stability carries over;
/// the semistable constructor keeps loop models usable.
pub fn quasi_tree_model(c: &CurveModel, qt: &QuasiTreeResult) -> Result<CurveModel, GraphError> {
    CurveModel::new_semistable(qt.gamma.clone(), c.p, qt.genus.clone(), Some(qt.p_rank.clone()))
}
