//! `Z/nZ`-covers of semi-graphs and the character eigenspaces of their first
//! cohomology.
//!
//! A cover is described by stabilizer orders per vertex and closed edge plus
//! a voltage per closed edge. Upstairs, the fiber over a vertex `v` is the
//! coset space `Z/nZ / D_v`, identified with residues mod `d_v = n/#D_v`;
//! an edge coset `c` attaches to `c mod d_{v1}` on one side and to
//! `(c + voltage) mod d_{v2}` on the other. The deck action is translation.
//!
//! `eigenspace_dims` computes `dim M(j)` for the `Z/nZ`-action on
//! `H^1(total graph)` two independent ways and insists they agree:
//!
//! * character-theoretically, from fixed-point counts of every group
//!   element (the trace on cochains minus vertices plus fixed components);
//! * directly, as eigenspaces of the deck generator on the cycle space
//!   over a prime field `q ≡ 1 (mod n)`.
//!
//! Multiplicities of a rational representation are constant on Galois
//! orbits of characters, so homology against cohomology makes no
//! difference here; the direct oracle works with the cycle space.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{smallest_prime_one_mod, Field, PrimeField};
use crate::matrix::Matrix;
use crate::semigraph::{EdgeId, GraphError, SemiGraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("n must be >= 1")]
    BadOrder,
    #[error("stabilizer order {0} of `{1}` does not divide n")]
    BadStabilizer(u64, String),
    #[error("edge stabilizer of `{0}` does not embed in both endpoint stabilizers")]
    EdgeNotInVertex(String),
    #[error("voltage {0} of `{1}` out of range")]
    BadVoltage(u64, String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("characteristic {0} divides n = {1}")]
    CharDividesOrder(u64, u64),
    #[error("the two eigenspace computations disagree: {0}")]
    OracleDisagreement(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Stabilizer/voltage data for a `Z/nZ`-cover of `base`.
///
/// Stabilizers are subgroups of `Z/nZ`, recorded by their order (a divisor
/// of `n`); the subgroup of order `m` is generated by `n/m`. Voltages are
/// read along the orientation from the lexicographically smaller endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub base: SemiGraph,
    pub n: u64,
    pub vertex_stab: BTreeMap<VertexId, u64>,
    pub edge_stab: BTreeMap<EdgeId, u64>,
    pub voltage: BTreeMap<EdgeId, u64>,
}

impl CoverSpec {
    /// Missing stabilizers default to trivial, missing voltages to zero.
    pub fn new(
        base: SemiGraph,
        n: u64,
        vertex_stab: BTreeMap<VertexId, u64>,
        edge_stab: BTreeMap<EdgeId, u64>,
        voltage: BTreeMap<EdgeId, u64>,
    ) -> Result<Self, CoverError> {
        if n == 0 {
            return Err(CoverError::BadOrder);
        }
        for v in vertex_stab.keys() {
            if !base.has_vertex(v) {
                return Err(CoverError::UnknownVertex(v.0.clone()));
            }
        }
        for e in edge_stab.keys().chain(voltage.keys()) {
            if base.ends(e).is_none() {
                return Err(CoverError::UnknownEdge(e.0.clone()));
            }
        }
        let mut vs = BTreeMap::new();
        for v in base.vertices() {
            let m = *vertex_stab.get(v).unwrap_or(&1);
            if m == 0 || !n.is_multiple_of(m) {
                return Err(CoverError::BadStabilizer(m, v.0.clone()));
            }
            vs.insert(v.clone(), m);
        }
        let mut es = BTreeMap::new();
        let mut volt = BTreeMap::new();
        let edges: Vec<(EdgeId, (VertexId, VertexId))> = base
            .closed_edges()
            .map(|(e, ab)| (e.clone(), ab.clone()))
            .collect();
        for (e, (a, b)) in &edges {
            let m = *edge_stab.get(e).unwrap_or(&1);
            if m == 0 || !n.is_multiple_of(m) {
                return Err(CoverError::BadStabilizer(m, e.0.clone()));
            }
            // cyclic subgroups: containment is divisibility of orders
            if vs[a] % m != 0 || vs[b] % m != 0 {
                return Err(CoverError::EdgeNotInVertex(e.0.clone()));
            }
            es.insert(e.clone(), m);
            let bv = *voltage.get(e).unwrap_or(&0);
            if bv >= n {
                return Err(CoverError::BadVoltage(bv, e.0.clone()));
            }
            volt.insert(e.clone(), bv);
        }
        Ok(CoverSpec { base, n, vertex_stab: vs, edge_stab: es, voltage: volt })
    }

    pub fn vertex_fiber(&self, v: &VertexId) -> u64 {
        self.n / self.vertex_stab[v]
    }

    pub fn edge_fiber(&self, e: &EdgeId) -> u64 {
        self.n / self.edge_stab[e]
    }

    /// Voltage re-based along a lexicographic-BFS spanning tree: tree edges
    /// become 0, the rest carry their cycle sums. The cover is unchanged up
    /// to isomorphism.
    pub fn cycle_sums(&self) -> BTreeMap<EdgeId, u64> {
        let mut potential: BTreeMap<VertexId, u64> = BTreeMap::new();
        let start = self.base.vertices().next().expect("non-empty").clone();
        potential.insert(start.clone(), 0);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut tree: BTreeSet<EdgeId> = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            for e in self.base.closed_at(&v) {
                let (a, b) = self.base.ends(&e).unwrap().clone();
                if a == b {
                    continue;
                }
                let other = if a == v { b.clone() } else { a.clone() };
                if potential.contains_key(&other) {
                    continue;
                }
                // voltage runs a -> b with a <= b
                let volt = self.voltage[&e];
                let pv = potential[&v];
                let pother = if v == a {
                    (pv + volt) % self.n
                } else {
                    (pv + self.n - volt) % self.n
                };
                potential.insert(other.clone(), pother);
                tree.insert(e);
                queue.push_back(other);
            }
        }
        self.voltage
            .iter()
            .map(|(e, &volt)| {
                if tree.contains(e) {
                    (e.clone(), 0)
                } else {
                    let (a, b) = self.base.ends(e).unwrap();
                    let sum = (potential[a] + volt + self.n - potential[b]) % self.n;
                    (e.clone(), sum)
                }
            })
            .collect()
    }
}

/// Connectivity of the total space: the subgroup generated by all vertex and
/// edge stabilizers together with the cycle sums must be all of `Z/nZ`.
pub fn is_connected_cover(spec: &CoverSpec) -> bool {
    let mut g = spec.n;
    for (v, &m) in &spec.vertex_stab {
        let _ = v;
        g = gcd(g, spec.n / m);
    }
    for (e, &m) in &spec.edge_stab {
        let _ = e;
        g = gcd(g, spec.n / m);
    }
    for (_, s) in spec.cycle_sums() {
        g = gcd(g, s);
    }
    g == 1
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The total semi-graph with its deck action and projection.
#[derive(Clone, Debug)]
pub struct GraphCover {
    pub spec: CoverSpec,
    pub total: SemiGraph,
    /// upstairs vertex -> (base vertex, residue)
    pub vertex_proj: BTreeMap<VertexId, (VertexId, u64)>,
    /// upstairs closed edge -> (base edge, residue)
    pub edge_proj: BTreeMap<EdgeId, (EdgeId, u64)>,
}

impl GraphCover {
    pub fn act_vertex(&self, r: u64, v: &VertexId) -> VertexId {
        let (base, c) = &self.vertex_proj[v];
        let d = self.spec.vertex_fiber(base);
        upstairs_vertex(base, (c + r) % d)
    }

    pub fn act_edge(&self, r: u64, e: &EdgeId) -> EdgeId {
        let (base, c) = &self.edge_proj[e];
        let d = self.spec.edge_fiber(base);
        upstairs_edge(base, (c + r) % d)
    }
}

fn upstairs_vertex(v: &VertexId, c: u64) -> VertexId {
    VertexId(format!("{}#{}", v.0, c))
}

fn upstairs_edge(e: &EdgeId, c: u64) -> EdgeId {
    EdgeId(format!("{}#{}", e.0, c))
}

/// Voltage construction of the covering graph.
pub fn build_cover(spec: &CoverSpec) -> GraphCover {
    let mut vertices = Vec::new();
    let mut vertex_proj = BTreeMap::new();
    for v in spec.base.vertices() {
        for c in 0..spec.vertex_fiber(v) {
            let id = upstairs_vertex(v, c);
            vertex_proj.insert(id.clone(), (v.clone(), c));
            vertices.push(id);
        }
    }
    let mut closed = Vec::new();
    let mut edge_proj = BTreeMap::new();
    for (e, (a, b)) in spec.base.closed_edges() {
        let (da, db) = (spec.vertex_fiber(a), spec.vertex_fiber(b));
        let volt = spec.voltage[e];
        for c in 0..spec.edge_fiber(e) {
            let id = upstairs_edge(e, c);
            edge_proj.insert(id.clone(), (e.clone(), c));
            let side1 = upstairs_vertex(a, c % da);
            let side2 = upstairs_vertex(b, (c + volt) % db);
            closed.push((id, side1, side2));
        }
    }
    // open edges never matter for H^1; lift them anyway for completeness
    let mut open = Vec::new();
    for (e, v) in spec.base.open_edges() {
        for c in 0..spec.vertex_fiber(v) {
            open.push((upstairs_edge(e, c), upstairs_vertex(v, c)));
        }
    }
    // assemble without the connectivity check: covers may be disconnected
    let total = assemble_unchecked(vertices, closed, open);
    GraphCover { spec: spec.clone(), total, vertex_proj, edge_proj }
}

/// Internal: a semi-graph that skips the connectivity validation.
fn assemble_unchecked(
    vertices: Vec<VertexId>,
    closed: Vec<(EdgeId, VertexId, VertexId)>,
    open: Vec<(EdgeId, VertexId)>,
) -> SemiGraph {
    // connect components artificially is wrong; instead rebuild through the
    // public constructor component by component is overkill. SemiGraph::new
    // enforces connectivity, so for totals we keep a connected check out by
    // construction: serialize through the permissive path below.
    SemiGraph::new_unchecked(vertices, closed, open)
}

/// Eigenspace dimensions `dim M(j)` for `j = 0, ..., n-1`, computed by both
/// oracles over `GF(q)` with `q ≡ 1 (mod n)`, `q != char_p`, `q` exceeding
/// the edge count. Disagreement is an internal error.
pub fn eigenspace_dims(cover: &GraphCover, char_p: u64) -> Result<Vec<u64>, CoverError> {
    let n = cover.spec.n;
    if char_p > 1 && n.is_multiple_of(char_p) {
        return Err(CoverError::CharDividesOrder(char_p, n));
    }
    let floor = (cover.total.closed_count() as u64 + 2).max(char_p).max(n);
    let q = smallest_prime_one_mod(n, floor);
    let by_trace = dims_by_traces(cover, q);
    let direct = dims_by_cycle_space(cover, q);
    if by_trace != direct {
        return Err(CoverError::OracleDisagreement(format!(
            "traces {:?} vs cycle space {:?}",
            by_trace, direct
        )));
    }
    Ok(by_trace)
}

/// Character-theoretic dimensions only, without the linear-algebra
/// cross-check. The enumeration sweeps use this; the agreement of the two
/// oracles is established separately by the cover suite.
pub fn eigenspace_dims_fast(cover: &GraphCover, char_p: u64) -> Result<Vec<u64>, CoverError> {
    let n = cover.spec.n;
    if char_p > 1 && n.is_multiple_of(char_p) {
        return Err(CoverError::CharDividesOrder(char_p, n));
    }
    let floor = (cover.total.closed_count() as u64 + 2).max(char_p).max(n);
    let q = smallest_prime_one_mod(n, floor);
    Ok(dims_by_traces(cover, q))
}

/// Character-theoretic computation from Lefschetz-style fixed counts.
fn dims_by_traces(cover: &GraphCover, q: u64) -> Vec<u64> {
    let n = cover.spec.n;
    let f = PrimeField::new(q).expect("prime");
    // components of the total graph and the action on them
    let comp = components(&cover.total);
    let comp_of: BTreeMap<&VertexId, usize> = comp
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().map(move |v| (v, i)))
        .collect();
    let traces: Vec<i64> = (0..n)
        .map(|r| {
            let mut fix_e = 0i64;
            for (e, _) in cover.total.closed_edges() {
                if cover.act_edge(r, e) == *e {
                    // the deck action preserves branches, so sign +1
                    fix_e += 1;
                }
            }
            let mut fix_v = 0i64;
            for v in cover.total.vertices() {
                if cover.act_vertex(r, v) == *v {
                    fix_v += 1;
                }
            }
            let mut fix_c = 0i64;
            for set in &comp {
                let rep = set.iter().next().unwrap();
                let image = cover.act_vertex(r, rep);
                if comp_of[&image] == comp_of[rep] {
                    fix_c += 1;
                }
            }
            fix_e - fix_v + fix_c
        })
        .collect();
    let omega = f.root_of_unity(n);
    let inv_n = f.inv(&f.elem(n)).expect("n invertible");
    (0..n)
        .map(|j| {
            let mut acc = f.zero();
            for (r, &tr) in traces.iter().enumerate() {
                // omega^(-j r)
                let chi = f.pow(omega, ((n - j % n) as u128 * r as u128) % n as u128);
                let t = f.elem_i64(tr);
                acc = f.add(&acc, &f.mul(&t, &chi));
            }
            f.mul(&acc, &inv_n)
        })
        .collect()
}

/// Direct computation: eigenspaces of the deck generator on `ker(boundary)`.
fn dims_by_cycle_space(cover: &GraphCover, q: u64) -> Vec<u64> {
    let n = cover.spec.n;
    let f = PrimeField::new(q).expect("prime");
    let edges: Vec<EdgeId> = cover.total.closed_edges().map(|(e, _)| e.clone()).collect();
    let verts: Vec<VertexId> = cover.total.vertices().cloned().collect();
    let eidx: BTreeMap<&EdgeId, usize> = edges.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let vidx: BTreeMap<&VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
    // boundary: edge -> head - tail, oriented side1 -> side2
    let mut boundary = Matrix::<PrimeField>::zero(&f, verts.len(), edges.len());
    for (col, e) in edges.iter().enumerate() {
        let (a, b) = cover.total.ends(e).unwrap();
        if a == b {
            continue;
        }
        let (tail, head) = oriented_ends(cover, e);
        boundary[(vidx[&head], col)] = f.add(&boundary[(vidx[&head], col)], &f.one());
        boundary[(vidx[&tail], col)] = f.sub(&boundary[(vidx[&tail], col)], &f.one());
    }
    let kernel = boundary.kernel_basis(&f); // E x b
    let b = kernel.cols;
    // generator permutation on edges with orientation signs
    let mut gen = Matrix::<PrimeField>::zero(&f, edges.len(), edges.len());
    for (col, e) in edges.iter().enumerate() {
        let img = cover.act_edge(1, e);
        // branch labels are preserved, so the sign is +1
        gen[(eidx[&img], col)] = f.one();
    }
    let omega = f.root_of_unity(n);
    (0..n)
        .map(|j| {
            // dim ker((T - w^j) restricted to the cycle space)
            let wj = f.pow(omega, j as u128);
            let mut shifted = gen.clone();
            for i in 0..edges.len() {
                shifted[(i, i)] = f.sub(&shifted[(i, i)], &wj);
            }
            let restricted = shifted.mul(&f, &kernel);
            (b - restricted.rank(&f)) as u64
        })
        .collect()
}

/// Orientation convention: side1 is the (lex-min endpoint) branch.
fn oriented_ends(cover: &GraphCover, e: &EdgeId) -> (VertexId, VertexId) {
    let (base, c) = &cover.edge_proj[e];
    let (a, b) = cover.spec.base.ends(base).unwrap();
    let volt = cover.spec.voltage[base];
    let tail = upstairs_vertex(a, c % cover.spec.vertex_fiber(a));
    let head = upstairs_vertex(b, (c + volt) % cover.spec.vertex_fiber(b));
    (tail, head)
}

fn components(g: &SemiGraph) -> Vec<BTreeSet<VertexId>> {
    let mut remaining: BTreeSet<VertexId> = g.vertices().cloned().collect();
    let mut out = Vec::new();
    while let Some(start) = remaining.iter().next().cloned() {
        let mut set = BTreeSet::new();
        let mut queue = std::collections::VecDeque::from([start.clone()]);
        remaining.remove(&start);
        set.insert(start);
        while let Some(v) = queue.pop_front() {
            for (_, (a, b)) in g.closed_edges() {
                let other = if a == &v {
                    b
                } else if b == &v {
                    a
                } else {
                    continue;
                };
                if remaining.remove(other) {
                    set.insert(other.clone());
                    queue.push_back(other.clone());
                }
            }
        }
        out.push(set);
    }
    out
}

/// Betti number of a possibly disconnected graph.
pub fn total_betti(g: &SemiGraph) -> u64 {
    let c = components(g).len() as u64;
    g.closed_count() as u64 + c - g.vertex_count() as u64
}

// ---------------------------------------------------------------------------
// Formula checks

#[derive(Clone, Debug, Serialize)]
pub struct FormulaCheck {
    pub claim: String,
    pub expected: u64,
    pub got: u64,
    pub pass: bool,
    pub details: String,
}

/// Single-vertex bases: `dim M(1)` equals the number of split nodes minus
/// one when the vertex fiber is full, else the number of split nodes.
/// Requires a connected cover.
pub fn check_single_vertex(spec: &CoverSpec, char_p: u64) -> Result<FormulaCheck, CoverError> {
    assert_eq!(spec.base.vertex_count(), 1, "single-vertex base required");
    assert!(is_connected_cover(spec), "connected cover required");
    let cover = build_cover(spec);
    let dims = eigenspace_dims(&cover, char_p)?;
    let split_nodes = spec.edge_stab.values().filter(|&&m| m == 1).count() as u64;
    let v = spec.base.vertices().next().unwrap();
    let full_fiber = spec.vertex_fiber(v) == spec.n;
    let expected = if full_fiber { split_nodes - 1 } else { split_nodes };
    let got = if spec.n >= 2 { dims[1] } else { dims[0] };
    Ok(FormulaCheck {
        claim: "eigenspace-single-vertex".into(),
        expected,
        got,
        pass: expected == got,
        details: format!(
            "split nodes {} of {}, vertex fiber {}",
            split_nodes,
            spec.base.closed_count(),
            spec.vertex_fiber(v)
        ),
    })
}

/// Two-vertex loopless bases. When both sides split completely the cover is
/// topological and `dim M(1) = r_X - 1`; when exactly one side splits it is
/// the split-node count minus one; otherwise the split-node count.
pub fn check_two_vertex(spec: &CoverSpec, char_p: u64) -> Result<FormulaCheck, CoverError> {
    assert_eq!(spec.base.vertex_count(), 2, "two-vertex base required");
    assert!(spec.base.loop_edges().is_empty(), "loopless base required");
    assert!(is_connected_cover(spec), "connected cover required");
    let cover = build_cover(spec);
    let dims = eigenspace_dims(&cover, char_p)?;
    let split_nodes = spec.edge_stab.values().filter(|&&m| m == 1).count() as u64;
    let splits = spec
        .base
        .vertices()
        .filter(|v| spec.vertex_fiber(v) == spec.n)
        .count();
    let r_x = spec.base.betti_number() as u64;
    let expected = match splits {
        2 => r_x.saturating_sub(1),
        1 => split_nodes - 1,
        _ => split_nodes,
    };
    let got = if spec.n >= 2 { dims[1] } else { dims[0] };
    Ok(FormulaCheck {
        claim: "eigenspace-two-vertex".into(),
        expected,
        got,
        pass: expected == got,
        details: format!("split nodes {split_nodes}, fully split sides {splits}, r_X {r_x}"),
    })
}

/// Connected topological covers (all stabilizers trivial): `dim M(0) = r_X`
/// and `dim M(j) = r_X - 1` for `j != 0`.
pub fn check_topological(spec: &CoverSpec, char_p: u64) -> Result<Vec<FormulaCheck>, CoverError> {
    assert!(spec.vertex_stab.values().all(|&m| m == 1));
    assert!(spec.edge_stab.values().all(|&m| m == 1));
    assert!(is_connected_cover(spec), "connected cover required");
    let cover = build_cover(spec);
    let dims = eigenspace_dims(&cover, char_p)?;
    let r_x = spec.base.betti_number() as u64;
    Ok(dims
        .iter()
        .enumerate()
        .map(|(j, &got)| {
            let expected = if j == 0 { r_x } else { r_x - 1 };
            FormulaCheck {
                claim: "eigenspace-topological-cover".into(),
                expected,
                got,
                pass: expected == got,
                details: format!("j = {j}"),
            }
        })
        .collect())
}

/// The standalone cyclic-shift action: `V` of dimension `t(s-1)` with basis
/// vectors cycled through the `t` blocks and the last one mapped to minus
/// the sum of the first block. `dim V(j) = 0` iff `s | j`, else 1.
pub fn cyclic_shift_eigendims(s: u64, t: u64, char_p: u64) -> Vec<u64> {
    let n = s * t;
    assert!(n >= 1);
    let dim = (t * (s.saturating_sub(1))) as usize;
    if dim == 0 {
        return vec![0; n as usize];
    }
    let floor = (dim as u64 + 2).max(char_p).max(n);
    let q = smallest_prime_one_mod(n, floor);
    let f = PrimeField::new(q).expect("prime");
    // index (a, b) -> (a-1) * t + (b-1), a in 1..s, b in 1..=t
    let idx = |a: u64, b: u64| ((a - 1) * t + (b - 1)) as usize;
    let mut action = Matrix::<PrimeField>::zero(&f, dim, dim);
    for a in 1..s {
        for b in 1..=t {
            let src = idx(a, b);
            if b < t {
                action[(idx(a, b + 1), src)] = f.one();
            } else if a < s - 1 {
                action[(idx(a + 1, 1), src)] = f.one();
            } else {
                for a2 in 1..s {
                    action[(idx(a2, 1), src)] = f.neg(&f.one());
                }
            }
        }
    }
    let omega = f.root_of_unity(n);
    (0..n)
        .map(|j| {
            let wj = f.pow(omega, j as u128);
            let mut shifted = action.clone();
            for i in 0..dim {
                shifted[(i, i)] = f.sub(&shifted[(i, i)], &wj);
            }
            (dim - shifted.rank(&f)) as u64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(vs: &[&str], closed: &[(&str, &str, &str)]) -> SemiGraph {
        SemiGraph::new(
            vs.iter().map(|v| VertexId(v.to_string())),
            closed.iter().map(|(e, a, b)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(b.to_string()))
            }),
            [],
        )
        .unwrap()
    }

    fn spec(
        base: SemiGraph,
        n: u64,
        vstab: &[(&str, u64)],
        estab: &[(&str, u64)],
        volt: &[(&str, u64)],
    ) -> CoverSpec {
        CoverSpec::new(
            base,
            n,
            vstab.iter().map(|(v, m)| (VertexId(v.to_string()), *m)).collect(),
            estab.iter().map(|(e, m)| (EdgeId(e.to_string()), *m)).collect(),
            volt.iter().map(|(e, b)| (EdgeId(e.to_string()), *b)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_cover() {
        let base = graph(&["v"], &[("l", "v", "v")]);
        let s = spec(base, 1, &[], &[], &[]);
        let c = build_cover(&s);
        assert_eq!(c.total.vertex_count(), 1);
        assert_eq!(c.total.closed_count(), 1);
        let dims = eigenspace_dims(&c, 7).unwrap();
        assert_eq!(dims, vec![1]);
    }

    #[test]
    fn double_cover_of_loop_is_a_cycle() {
        let base = graph(&["v"], &[("l", "v", "v")]);
        let s = spec(base, 2, &[], &[], &[("l", 1)]);
        assert!(is_connected_cover(&s));
        let c = build_cover(&s);
        assert_eq!(c.total.vertex_count(), 2);
        assert_eq!(c.total.closed_count(), 2);
        assert!(c.total.loop_edges().is_empty());
        // dims (1, 0): the deck swap fixes the fundamental cycle
        assert_eq!(eigenspace_dims(&c, 7).unwrap(), vec![1, 0]);
    }

    #[test]
    fn full_stabilizer_gives_identity_action() {
        let base = graph(&["v"], &[("a", "v", "v"), ("b", "v", "v")]);
        let s = spec(base, 4, &[("v", 4)], &[("a", 4), ("b", 4)], &[]);
        let c = build_cover(&s);
        assert_eq!(c.total.vertex_count(), 1);
        let dims = eigenspace_dims(&c, 3).unwrap();
        assert_eq!(dims, vec![2, 0, 0, 0]);
    }

    #[test]
    fn topological_cover_formula() {
        // wedge of two loops, n = 2, voltages generating
        let base = graph(&["v"], &[("a", "v", "v"), ("b", "v", "v")]);
        let s = spec(base, 2, &[], &[], &[("a", 1), ("b", 1)]);
        let checks = check_topological(&s, 7).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        // r_X = 2: dims (2, 1)
        let dims = eigenspace_dims(&build_cover(&s), 7).unwrap();
        assert_eq!(dims, vec![2, 1]);
    }

    #[test]
    fn single_vertex_formula_cases() {
        // two split loops, topological: dim M(1) = #split - 1 = 1
        let base = graph(&["v"], &[("a", "v", "v"), ("b", "v", "v")]);
        let s = spec(base.clone(), 2, &[], &[], &[("a", 1), ("b", 1)]);
        let chk = check_single_vertex(&s, 7).unwrap();
        assert!(chk.pass, "{chk:?}");
        assert_eq!(chk.got, 1);
        // partial vertex stabilizer: dim M(1) = #split = 1
        let s2 = spec(
            graph(&["v"], &[("a", "v", "v")]),
            4,
            &[("v", 2)],
            &[("a", 1)],
            &[("a", 1)],
        );
        let chk2 = check_single_vertex(&s2, 7).unwrap();
        assert!(chk2.pass, "{chk2:?}");
        assert_eq!(chk2.got, 1);
        // fully ramified loops: dim M(1) = 0
        let s3 = spec(base, 2, &[("v", 2)], &[("a", 2), ("b", 2)], &[]);
        let chk3 = check_single_vertex(&s3, 7).unwrap();
        assert!(chk3.pass, "{chk3:?}");
        assert_eq!(chk3.got, 0);
    }

    #[test]
    fn two_vertex_formula_cases() {
        // the (s, t) = (2, 2) configuration: one edge base... the base here
        // is a single edge with full stabilizer on one side, half on the
        // other; four edges upstairs
        let base = graph(&["v1", "v2"], &[("e", "v1", "v2")]);
        let s = spec(base.clone(), 4, &[("v1", 4), ("v2", 2)], &[("e", 1)], &[("e", 1)]);
        assert!(is_connected_cover(&s));
        let c = build_cover(&s);
        assert_eq!(c.total.vertex_count(), 3);
        assert_eq!(c.total.closed_count(), 4);
        let dims = eigenspace_dims(&c, 7).unwrap();
        assert_eq!(dims, vec![0, 1, 0, 1]);
        let chk = check_two_vertex(&s, 7).unwrap();
        assert!(chk.pass, "{chk:?}");
        // both stabilizers full, single split edge, n = 3
        let s2 = spec(base.clone(), 3, &[("v1", 3), ("v2", 3)], &[("e", 1)], &[]);
        let chk2 = check_two_vertex(&s2, 7).unwrap();
        assert!(chk2.pass, "{chk2:?}");
        assert_eq!(chk2.got, 1);
        // topological double cover of the theta graph
        let theta = graph(
            &["v1", "v2"],
            &[("e1", "v1", "v2"), ("e2", "v1", "v2"), ("e3", "v1", "v2")],
        );
        let s3 = spec(theta, 2, &[], &[], &[("e2", 1)]);
        let chk3 = check_two_vertex(&s3, 7).unwrap();
        assert!(chk3.pass, "{chk3:?}");
        assert_eq!(chk3.got, 1); // r_X - 1
    }

    #[test]
    fn connectivity_criterion() {
        let tree = graph(&["v1", "v2"], &[("e", "v1", "v2")]);
        let s = spec(tree.clone(), 2, &[], &[], &[]);
        assert!(!is_connected_cover(&s));
        let loop_base = graph(&["v"], &[("l", "v", "v")]);
        assert!(is_connected_cover(&spec(loop_base, 2, &[], &[], &[("l", 1)])));
        assert!(is_connected_cover(&spec(tree, 2, &[("v1", 2)], &[], &[])));
    }

    #[test]
    fn dims_sum_to_betti_and_respect_galois_orbits() {
        let base = graph(
            &["v1", "v2"],
            &[("e1", "v1", "v2"), ("e2", "v1", "v2"), ("l", "v1", "v1")],
        );
        for n in [2u64, 4, 6] {
            for volt in 0..n {
                let s = spec(
                    base.clone(),
                    n,
                    &[("v1", 1), ("v2", n)],
                    &[("e1", 1), ("e2", 1), ("l", 1)],
                    &[("e2", volt % n), ("l", (volt + 1) % n)],
                );
                let c = build_cover(&s);
                let dims = eigenspace_dims(&c, 5).unwrap();
                assert_eq!(dims.iter().sum::<u64>(), total_betti(&c.total));
                for j in 0..n {
                    let g = gcd(j, n) % n;
                    assert_eq!(dims[j as usize], dims[g as usize], "orbit constancy");
                }
            }
        }
    }

    #[test]
    fn euler_characteristic_of_total() {
        let base = graph(&["v1", "v2"], &[("e1", "v1", "v2"), ("e2", "v1", "v2")]);
        let s = spec(base, 6, &[("v1", 2), ("v2", 3)], &[("e1", 1), ("e2", 1)], &[("e2", 1)]);
        let c = build_cover(&s);
        // fibers: vertices 3 + 2, edges 6 + 6
        assert_eq!(c.total.vertex_count(), 5);
        assert_eq!(c.total.closed_count(), 12);
        let dims = eigenspace_dims(&c, 5).unwrap();
        assert_eq!(dims.iter().sum::<u64>(), total_betti(&c.total));
    }

    #[test]
    fn cyclic_shift_dims() {
        for (s, t) in [(2u64, 2u64), (3, 2), (2, 3), (4, 3), (1, 5)] {
            let dims = cyclic_shift_eigendims(s, t, 7);
            for (j, &d) in dims.iter().enumerate() {
                let expected = if (j as u64) % s == 0 { 0 } else { 1 };
                assert_eq!(d, expected, "s={s} t={t} j={j}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        let base = graph(&["v1", "v2"], &[("e", "v1", "v2")]);
        // edge stabilizer must divide both vertex stabilizers
        assert!(CoverSpec::new(
            base.clone(),
            4,
            BTreeMap::from([(VertexId("v1".into()), 2), (VertexId("v2".into()), 4)]),
            BTreeMap::from([(EdgeId("e".into()), 4)]),
            BTreeMap::new(),
        )
        .is_err());
        // stabilizer order must divide n
        assert!(CoverSpec::new(
            base,
            4,
            BTreeMap::from([(VertexId("v1".into()), 3)]),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .is_err());
    }
}
