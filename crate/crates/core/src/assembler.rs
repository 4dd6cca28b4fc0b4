//! Global invariants of cyclic admissible covers of totally degenerate
//! curves, divisor-family constructions over minimal quasi-trees, and the
//! exhaustive search for maximizing characters.
//!
//! The global first invariant decomposes as the sum of the per-component
//! invariants plus the dimension of the first character eigenspace of the
//! covering graph's cohomology; this module wires the `p1cover` and
//! `graphcover` computations together along that decomposition.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::field::{Field, FieldError, FiniteField};
use crate::graphcover::{build_cover, eigenspace_dims, CoverError, CoverSpec};
use crate::p1cover::{self, P1Error, PointP1, RamifiedP1Cover};
use crate::padic::{Coeff, DigitContext, DigitError, DivisorBlock, MarkedDivisor};
use crate::quasitree::QuasiTreeResult;
use crate::semigraph::{CurveModel, EdgeId, GraphError, PathItem, SemiGraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssembleError {
    #[error("characteristic of the context ({0}) differs from the curve ({1})")]
    CharMismatch(u64, u64),
    #[error("n = {0} exceeds the supported cover order")]
    OrderTooLarge(Coeff),
    #[error("n must be at least 2 for a nontrivial character")]
    OrderTooSmall,
    #[error("marked divisor must be supported exactly on the open edges")]
    MarkedSupportMismatch,
    #[error("node exponents must cover exactly the closed edges")]
    NodeSupportMismatch,
    #[error("node exponent {0} out of range")]
    NodeExpOutOfRange(Coeff),
    #[error("component `{0}` violates the kernel condition: local degree {1}")]
    ComponentNotKernel(String, Coeff),
    #[error("component `{0}` has positive genus; supply its invariant externally")]
    PositiveGenus(String),
    #[error("missing external invariant for component `{0}`")]
    MissingGamma(String),
    #[error("quasi-tree input required: loop-free part must be a tree")]
    NotQuasiTree,
    #[error("need at least {0} marked points")]
    TooFewMarks(usize),
    #[error("threshold violated: n0 = {0} must exceed {1}")]
    Threshold(Coeff, Coeff),
    #[error("exactly three marked points required")]
    NotThreePoints,
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    P1(#[from] P1Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The constant `C(N)`: zero for `N = 0`, else `3^(N-1) N!`.
pub fn c_constant(n: u64) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for k in 1..=n {
        acc = acc.checked_mul(k as u128).expect("C(N) overflow");
    }
    acc.checked_mul(3u128.pow((n - 1) as u32)).expect("C(N) overflow")
}

// ---------------------------------------------------------------------------
// Admissible cover data

/// One branch point of a component: a marked point, the branch of a non-loop
/// node, or the second branch of a loop.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum BranchKey {
    Open(EdgeId),
    Node(EdgeId),
    LoopBack(EdgeId),
}

/// A cyclic character of the curve, given by its ramification data: marked
/// divisor on open edges, one exponent per closed edge (read at the branch
/// on the lexicographically smaller endpoint; the other branch carries the
/// complement), and gluing voltages for the induced graph cover.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleCoverData {
    pub curve: CurveModel,
    pub ctx: DigitContext,
    pub marked: MarkedDivisor,
    pub node_exps: BTreeMap<EdgeId, Coeff>,
    pub voltages: BTreeMap<EdgeId, u64>,
}

impl AdmissibleCoverData {
    pub fn new(
        curve: CurveModel,
        ctx: DigitContext,
        marked: MarkedDivisor,
        node_exps: BTreeMap<EdgeId, Coeff>,
        voltages: BTreeMap<EdgeId, u64>,
    ) -> Result<Self, AssembleError> {
        if ctx.p() != curve.p {
            return Err(AssembleError::CharMismatch(ctx.p(), curve.p));
        }
        if ctx.n() < 2 {
            return Err(AssembleError::OrderTooSmall);
        }
        if ctx.n() > u64::MAX as Coeff {
            return Err(AssembleError::OrderTooLarge(ctx.n()));
        }
        let opens: BTreeSet<EdgeId> = curve.graph.open_edges().map(|(e, _)| e.clone()).collect();
        let marked_keys: BTreeSet<EdgeId> = marked.coeffs().keys().cloned().collect();
        if opens != marked_keys {
            return Err(AssembleError::MarkedSupportMismatch);
        }
        let closed: BTreeSet<EdgeId> = curve.graph.closed_edges().map(|(e, _)| e.clone()).collect();
        let node_keys: BTreeSet<EdgeId> = node_exps.keys().cloned().collect();
        if closed != node_keys {
            return Err(AssembleError::NodeSupportMismatch);
        }
        for &c in node_exps.values() {
            if c >= ctx.n() {
                return Err(AssembleError::NodeExpOutOfRange(c));
            }
        }
        let data = AdmissibleCoverData { curve, ctx, marked, node_exps, voltages };
        for v in data.curve.graph.vertices() {
            let local: Coeff = data
                .component_branches(v)
                .iter()
                .map(|(_, c)| *c)
                .sum();
            if !local.is_multiple_of(data.ctx.n()) {
                return Err(AssembleError::ComponentNotKernel(v.0.clone(), local));
            }
        }
        Ok(data)
    }

    /// Exponent on the branch of `e` at its lexicographically smaller
    /// endpoint; the other branch carries `n - c mod n`.
    pub fn branch_exp(&self, e: &EdgeId, second_branch: bool) -> Coeff {
        let c = self.node_exps[e];
        if second_branch {
            (self.ctx.n() - c) % self.ctx.n()
        } else {
            c
        }
    }

    /// Ordered branch points of the component at `v` with their exponents:
    /// marked points first, then node branches, then loop back-branches.
    pub fn component_branches(&self, v: &VertexId) -> Vec<(BranchKey, Coeff)> {
        let g = &self.curve.graph;
        let mut out = Vec::new();
        for e in g.open_at(v) {
            out.push((BranchKey::Open(e.clone()), self.marked.coeff(&e)));
        }
        for e in g.closed_at(v) {
            let (a, b) = g.ends(&e).unwrap();
            if a == b {
                out.push((BranchKey::Node(e.clone()), self.branch_exp(&e, false)));
                out.push((BranchKey::LoopBack(e.clone()), self.branch_exp(&e, true)));
            } else {
                let second = b == v;
                out.push((BranchKey::Node(e.clone()), self.branch_exp(&e, second)));
            }
        }
        out
    }

    /// The subgroup order data of the induced graph cover.
    pub fn derive_cover_spec(&self) -> Result<CoverSpec, AssembleError> {
        let n = self.ctx.n() as u64;
        let mut vstab = BTreeMap::new();
        for v in self.curve.graph.vertices() {
            let mut g = self.ctx.n();
            for (_, c) in self.component_branches(v) {
                g = gcd_u128(g, c);
            }
            vstab.insert(v.clone(), (self.ctx.n() / g) as u64);
        }
        let mut estab = BTreeMap::new();
        for (e, _) in self.curve.graph.closed_edges() {
            let g = gcd_u128(self.ctx.n(), self.node_exps[e]);
            estab.insert(e.clone(), (self.ctx.n() / g) as u64);
        }
        CoverSpec::new(
            self.curve.graph.clone(),
            n,
            vstab,
            estab,
            self.voltages.clone(),
        )
        .map_err(Into::into)
    }

    /// The character is trivial iff every exponent and every rebased cycle
    /// voltage vanishes.
    pub fn is_trivial_character(&self) -> Result<bool, AssembleError> {
        if self.marked.coeffs().values().any(|&c| c != 0)
            || self.node_exps.values().any(|&c| c != 0)
        {
            return Ok(false);
        }
        let spec = self.derive_cover_spec()?;
        Ok(spec.cycle_sums().values().all(|&s| s == 0))
    }

    /// Branch-point coordinates for the component at `v`: the first three
    /// points are 0, 1, infinity, the rest take field elements in value
    /// order; the field degree is the smallest fitting them all.
    pub fn component_cover(&self, v: &VertexId) -> Result<RamifiedP1Cover, AssembleError> {
        if self.curve.genus_of(v) != 0 {
            return Err(AssembleError::PositiveGenus(v.0.clone()));
        }
        let branches = self.component_branches(v);
        let m = branches.len();
        let p = self.ctx.p();
        let mut r = 1usize;
        while (p as u128).pow(r as u32) + 1 < m as u128 {
            r += 1;
        }
        let field = FiniteField::new(p, r)?;
        let mut points = Vec::with_capacity(m);
        let mut next_value = 2u128;
        for k in 0..m {
            points.push(match k {
                0 => PointP1::Finite(field.zero()),
                1 => PointP1::Finite(field.one()),
                2 => PointP1::Infinity,
                _ => {
                    let pt = PointP1::Finite(field.elem(next_value));
                    next_value += 1;
                    pt
                }
            });
        }
        points.truncate(m);
        let exps: Vec<Coeff> = branches.iter().map(|(_, c)| *c).collect();
        RamifiedP1Cover::new(self.ctx, field, points, exps).map_err(Into::into)
    }

    /// Per-component first invariants; genus-0 components are computed,
    /// positive genus must come from `external`.
    pub fn component_gammas(
        &self,
        external: &BTreeMap<VertexId, u64>,
    ) -> Result<BTreeMap<VertexId, u64>, AssembleError> {
        let mut out = BTreeMap::new();
        for v in self.curve.graph.vertices() {
            if let Some(&g) = external.get(v) {
                out.insert(v.clone(), g);
                continue;
            }
            if self.curve.genus_of(v) != 0 {
                return Err(AssembleError::MissingGamma(v.0.clone()));
            }
            let cover = self.component_cover(v)?;
            out.insert(v.clone(), p1cover::gamma(&cover)?);
        }
        Ok(out)
    }

    /// `dim M(1)` of the induced graph cover.
    pub fn graph_term(&self) -> Result<u64, AssembleError> {
        let spec = self.derive_cover_spec()?;
        let cover = build_cover(&spec);
        let dims = eigenspace_dims(&cover, self.curve.p)?;
        Ok(dims[1.min(dims.len() - 1)])
    }
}

fn gcd_u128(a: Coeff, b: Coeff) -> Coeff {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// The global first invariant: component contributions plus the graph term.
pub fn total_gamma(
    data: &AdmissibleCoverData,
    component_gammas: &BTreeMap<VertexId, u64>,
) -> Result<u64, AssembleError> {
    let mut sum = 0u64;
    for v in data.curve.graph.vertices() {
        sum += component_gammas
            .get(v)
            .copied()
            .ok_or_else(|| AssembleError::MissingGamma(v.0.clone()))?;
    }
    Ok(sum + data.graph_term()?)
}

/// Both sides of the decomposition equivalence on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub total: u64,
    pub target: u64,
    pub global_attains: bool,
    pub component_gammas: BTreeMap<VertexId, u64>,
    pub component_targets: BTreeMap<VertexId, u64>,
    pub components_attain: bool,
    pub graph_term: u64,
    /// global attains iff every component attains
    pub equivalence_holds: bool,
    /// the upper bound itself is never exceeded
    pub bound_holds: bool,
}

/// Evaluates the decomposition equivalence for a totally degenerate
/// instance with a nontrivial character.
pub fn check_decomposition(data: &AdmissibleCoverData) -> Result<DecompositionReport, AssembleError> {
    let gammas = data.component_gammas(&BTreeMap::new())?;
    let graph_term = data.graph_term()?;
    let total: u64 = gammas.values().sum::<u64>() + graph_term;
    let g = data.curve.total_genus();
    let s = data.marked.s(None)?;
    let target = if data.marked.support_is_empty() {
        g.saturating_sub(1)
    } else {
        g + s as u64 - 1
    };
    let mut component_targets = BTreeMap::new();
    let mut components_attain = true;
    for v in data.curve.graph.vertices() {
        let branches = data.component_branches(v);
        let local_deg: Coeff = branches.iter().map(|(_, c)| *c).sum();
        let sv = local_deg / data.ctx.n();
        // trivial component character attains its p-rank, which is the
        // genus 0 here; otherwise the display asks for s_v - 1
        let tv = if branches.iter().all(|(_, c)| *c == 0) {
            0
        } else {
            (sv - 1) as u64
        };
        if gammas[v] != tv {
            components_attain = false;
        }
        component_targets.insert(v.clone(), tv);
    }
    let global_attains = total == target;
    Ok(DecompositionReport {
        total,
        target,
        global_attains,
        component_gammas: gammas,
        component_targets,
        components_attain,
        graph_term,
        equivalence_holds: global_attains == components_attain,
        bound_holds: total <= target,
    })
}

// ---------------------------------------------------------------------------
// Divisor families over a minimal quasi-tree

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum FamilyLabel {
    /// consecutive marked-point pair `(i, i+1)` on a vertex
    Mp(VertexId, usize),
    /// a vertex against a marked point on another component
    Nd(VertexId, EdgeId),
}

/// Divisor families assembled block by block along the quasi-tree.
#[derive(Clone, Debug, Serialize)]
pub struct MainFamily {
    pub ctx: DigitContext,
    pub t0: u32,
    pub labels: Vec<FamilyLabel>,
    /// per label, the block on each component (keyed by branch point)
    pub component_blocks: Vec<BTreeMap<VertexId, BTreeMap<EdgeId, Coeff>>>,
    /// per label, the block on the global marked points
    pub global_blocks: Vec<BTreeMap<EdgeId, Coeff>>,
    /// interleaved per-component divisors
    pub p_component: BTreeMap<VertexId, MarkedDivisor>,
    /// interleaved global divisor
    pub p_global: MarkedDivisor,
}

/// The component-against-marks divisor families, interleaved into the
/// per-component and global divisors, over a minimal quasi-tree.
///
/// `original` is the ambient curve (its genus and edge count feed the
/// threshold `n0 > max(C(g) + 1, #edges)`), `qt` its quasi-tree.
pub fn build_main_family(
    original: &CurveModel,
    qt: &QuasiTreeResult,
    t0: u32,
) -> Result<MainFamily, AssembleError> {
    let gamma = &qt.gamma;
    if gamma.is_empty() || !gamma.loopless_is_tree() {
        return Err(AssembleError::NotQuasiTree);
    }
    let protected: BTreeSet<EdgeId> =
        original.graph.open_edges().map(|(e, _)| e.clone()).collect();
    let marks: Vec<EdgeId> = gamma
        .open_edges()
        .filter(|(e, _)| protected.contains(*e))
        .map(|(e, _)| e.clone())
        .collect();
    let n_x = marks.len();
    if n_x < 2 {
        return Err(AssembleError::TooFewMarks(2));
    }
    let p = original.p;
    let ctx0 = DigitContext::new(p, t0)?;
    let n0 = ctx0.n();
    let g_x = original.total_genus();
    let edge_count =
        (original.graph.closed_count() + original.graph.open_count()) as Coeff;
    let threshold = (c_constant(g_x) + 1).max(edge_count);
    if n0 <= threshold {
        return Err(AssembleError::Threshold(n0, threshold));
    }

    // D'(v): ordered original marks on v; D(v): marks plus non-loop nodes
    let verts: Vec<VertexId> = gamma.vertices().cloned().collect();
    let marks_at = |v: &VertexId| -> Vec<EdgeId> {
        gamma
            .open_at(v)
            .into_iter()
            .filter(|e| protected.contains(e))
            .collect()
    };
    let nodes_at = |v: &VertexId| -> Vec<EdgeId> {
        gamma
            .closed_at(v)
            .into_iter()
            .filter(|e| !gamma.is_loop(e))
            .collect()
    };
    let d_of = |v: &VertexId| -> Vec<EdgeId> {
        let mut d = marks_at(v);
        d.extend(nodes_at(v));
        d
    };
    let vertex_of_mark = |z: &EdgeId| -> VertexId { gamma.open_vertex(z).unwrap().clone() };

    // the node at `u` through which the tree path from `u` to `w` leaves
    let gate = |u: &VertexId, w: &VertexId| -> EdgeId {
        let path = gamma.minimal_path(u, w).expect("tree path");
        match &path[1] {
            PathItem::Edge(e) => e.clone(),
            _ => unreachable!("paths alternate"),
        }
    };
    let on_path = |u: &VertexId, from: &VertexId, to: &VertexId| -> bool {
        let len = |a: &VertexId, b: &VertexId| {
            SemiGraph::path_length(&gamma.minimal_path(a, b).expect("tree path"))
        };
        len(from, u) + len(u, to) == len(from, to)
    };

    // labels in deterministic order
    let mut labels = Vec::new();
    for v in &verts {
        let mv = marks_at(v);
        if mv.len() >= 2 {
            for i in 1..mv.len() {
                labels.push(FamilyLabel::Mp(v.clone(), i));
            }
        }
        if !mv.is_empty() {
            for z in &marks {
                if vertex_of_mark(z) != *v {
                    labels.push(FamilyLabel::Nd(v.clone(), z.clone()));
                }
            }
        }
    }
    labels.sort();

    let a_small: Coeff = 1;
    let a_big: Coeff = n0 - 1;

    let mut component_blocks = Vec::with_capacity(labels.len());
    let mut global_blocks = Vec::with_capacity(labels.len());
    for label in &labels {
        let mut per_comp: BTreeMap<VertexId, BTreeMap<EdgeId, Coeff>> = BTreeMap::new();
        let mut global: BTreeMap<EdgeId, Coeff> = BTreeMap::new();
        match label {
            FamilyLabel::Mp(v, i) => {
                let mv = marks_at(v);
                let (x_i, x_i1) = (mv[i - 1].clone(), mv[*i].clone());
                for u in &verts {
                    let mut block = BTreeMap::new();
                    if u == v {
                        for x in d_of(u) {
                            let c = if x == x_i {
                                a_small
                            } else if x == x_i1 {
                                a_big
                            } else {
                                n0
                            };
                            block.insert(x, c);
                        }
                    } else {
                        let toward_v = gate(u, v);
                        for x in d_of(u) {
                            block.insert(x.clone(), if x == toward_v { 0 } else { n0 });
                        }
                    }
                    per_comp.insert(u.clone(), block);
                }
                for z in &marks {
                    let c = if *z == x_i {
                        a_small
                    } else if *z == x_i1 {
                        a_big
                    } else {
                        n0
                    };
                    global.insert(z.clone(), c);
                }
            }
            FamilyLabel::Nd(v, z) => {
                let w_z = vertex_of_mark(z);
                let mv = marks_at(v);
                let x_last = mv.last().expect("m_v >= 1").clone();
                for u in &verts {
                    let mut block = BTreeMap::new();
                    if u == v {
                        let toward_wz = gate(u, &w_z);
                        for x in d_of(u) {
                            let c = if x == x_last {
                                a_small
                            } else if x == toward_wz {
                                a_big
                            } else {
                                n0
                            };
                            block.insert(x, c);
                        }
                    } else if *u == w_z {
                        let toward_v = gate(u, v);
                        for x in d_of(u) {
                            let c = if x == toward_v {
                                a_small
                            } else if x == *z {
                                a_big
                            } else {
                                n0
                            };
                            block.insert(x, c);
                        }
                    } else if on_path(u, v, &w_z) {
                        let toward_v = gate(u, v);
                        let toward_wz = gate(u, &w_z);
                        for x in d_of(u) {
                            let c = if x == toward_v {
                                a_small
                            } else if x == toward_wz {
                                a_big
                            } else {
                                n0
                            };
                            block.insert(x, c);
                        }
                    } else {
                        let toward_v = gate(u, v);
                        for x in d_of(u) {
                            block.insert(x.clone(), if x == toward_v { 0 } else { n0 });
                        }
                    }
                    per_comp.insert(u.clone(), block);
                }
                for m in &marks {
                    let c = if *m == x_last {
                        a_small
                    } else if m == z {
                        a_big
                    } else {
                        n0
                    };
                    global.insert(m.clone(), c);
                }
            }
        }
        component_blocks.push(per_comp);
        global_blocks.push(global);
    }

    let d = labels.len() as u32;
    let ctx = DigitContext::new(p, d * t0)?;
    let interleave_maps = |maps: Vec<BTreeMap<EdgeId, Coeff>>| -> Result<MarkedDivisor, DigitError> {
        let blocks: Vec<DivisorBlock> = maps
            .into_iter()
            .map(|coeffs| DivisorBlock { p, t: t0, coeffs })
            .collect();
        crate::padic::interleave(&blocks)
    };
    let mut p_component = BTreeMap::new();
    for v in &verts {
        let maps: Vec<BTreeMap<EdgeId, Coeff>> =
            component_blocks.iter().map(|cb| cb[v].clone()).collect();
        p_component.insert(v.clone(), interleave_maps(maps)?);
    }
    let p_global = interleave_maps(global_blocks.clone())?;

    Ok(MainFamily {
        ctx,
        t0,
        labels,
        component_blocks,
        global_blocks,
        p_component,
        p_global,
    })
}

/// Structural validation of a [`MainFamily`]; each field is a separate
/// pass/fail so the suites can report them individually.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyChecks {
    pub kernel_global: bool,
    pub kernel_components: bool,
    pub degree_global: bool,
    pub degree_components: bool,
    pub shift_invariant: bool,
    pub node_sums: bool,
    pub restriction: bool,
    pub all: bool,
}

pub fn check_main_family(
    original: &CurveModel,
    qt: &QuasiTreeResult,
    fam: &MainFamily,
) -> FamilyChecks {
    let gamma = &qt.gamma;
    let n = fam.ctx.n();
    let protected: BTreeSet<EdgeId> =
        original.graph.open_edges().map(|(e, _)| e.clone()).collect();
    let n_x = gamma
        .open_edges()
        .filter(|(e, _)| protected.contains(*e))
        .count() as Coeff;

    let kernel_global = fam.p_global.is_kernel();
    let kernel_components = fam.p_component.values().all(|d| d.is_kernel());
    let degree_global = fam.p_global.deg() == (n_x - 1) * n;
    let degree_components = fam.p_component.iter().all(|(v, d)| {
        let d_v = {
            let mut cnt = gamma
                .open_at(v)
                .into_iter()
                .filter(|e| protected.contains(e))
                .count();
            cnt += gamma.closed_at(v).into_iter().filter(|e| !gamma.is_loop(e)).count();
            cnt as Coeff
        };
        d.deg() == (d_v - 1) * n
    });
    let shift_invariant =
        (0..fam.ctx.t()).all(|i| fam.p_global.digit_shift(i).deg() == fam.p_global.deg());
    let node_sums = gamma
        .closed_edges()
        .filter(|(e, _)| !gamma.is_loop(e))
        .all(|(e, (a, b))| {
            let ca = fam.p_component[a].coeff(e);
            let cb = fam.p_component[b].coeff(e);
            ca > 0 && cb > 0 && ca + cb == n
        });
    let restriction = fam.p_component.iter().all(|(v, d)| {
        gamma
            .open_at(v)
            .into_iter()
            .filter(|e| protected.contains(e))
            .all(|e| d.coeff(&e) == fam.p_global.coeff(&e))
    });
    let all = kernel_global
        && kernel_components
        && degree_global
        && degree_components
        && shift_invariant
        && node_sums
        && restriction;
    FamilyChecks {
        kernel_global,
        kernel_components,
        degree_global,
        degree_components,
        shift_invariant,
        node_sums,
        restriction,
        all,
    }
}

// ---------------------------------------------------------------------------
// Three-point families

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum ThreePointCase {
    SingleVertex,
    TwoVertex,
    Chain,
    Star,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreePointFamily {
    pub ctx: DigitContext,
    pub case: ThreePointCase,
    pub d_global: MarkedDivisor,
    pub p_component: BTreeMap<VertexId, MarkedDivisor>,
    /// digit blocks of each per-component divisor along (t1, t2, t3)
    pub q_blocks: BTreeMap<VertexId, Vec<DivisorBlock>>,
    pub threshold_ok: bool,
}

/// Per-component divisors for a prescribed three-block global divisor on a
/// quasi-tree curve with three marked points. The coefficient at a node is
/// the class of the total marked weight on the far side of that node.
pub fn build_three_point_family(
    model: &CurveModel,
    blocks: &[DivisorBlock; 3],
) -> Result<ThreePointFamily, AssembleError> {
    let gamma = &model.graph;
    if !gamma.loopless_is_tree() {
        return Err(AssembleError::NotQuasiTree);
    }
    let marks: Vec<EdgeId> = gamma.open_edges().map(|(e, _)| e.clone()).collect();
    if marks.len() != 3 {
        return Err(AssembleError::NotThreePoints);
    }
    for b in blocks {
        b.check_three_point_constraints()?;
        let keys: Vec<EdgeId> = b.coeffs.keys().cloned().collect();
        if keys != marks {
            return Err(AssembleError::MarkedSupportMismatch);
        }
    }
    let d_global = crate::padic::interleave(blocks.as_slice())?;
    let ctx = *d_global.ctx();
    let n = ctx.n();

    let mark_vertices: Vec<VertexId> = marks
        .iter()
        .map(|e| gamma.open_vertex(e).unwrap().clone())
        .collect();
    let distinct: BTreeSet<&VertexId> = mark_vertices.iter().collect();
    let case = match distinct.len() {
        1 => ThreePointCase::SingleVertex,
        2 => ThreePointCase::TwoVertex,
        _ => {
            // median of the three marked vertices in the tree
            let median = tree_median(gamma, &mark_vertices[0], &mark_vertices[1], &mark_vertices[2]);
            if distinct.contains(&median) {
                ThreePointCase::Chain
            } else {
                ThreePointCase::Star
            }
        }
    };

    // far-side weight of each node branch
    let mut p_component = BTreeMap::new();
    for v in gamma.vertices() {
        let mut coeffs: BTreeMap<EdgeId, Coeff> = BTreeMap::new();
        for e in gamma.open_at(v) {
            coeffs.insert(e.clone(), d_global.coeff(&e));
        }
        for e in gamma.closed_at(v) {
            if gamma.is_loop(&e) {
                continue;
            }
            let far: Coeff = marks
                .iter()
                .filter(|z| {
                    let w = gamma.open_vertex(z).unwrap();
                    // the mark is on the far side iff the tree path from v
                    // to it starts with e
                    if w == v {
                        return false;
                    }
                    let path = gamma.minimal_path(v, w).expect("tree path");
                    matches!(&path[1], PathItem::Edge(pe) if *pe == e)
                })
                .map(|z| d_global.coeff(z))
                .sum();
            coeffs.insert(e.clone(), far % n);
        }
        p_component.insert(v.clone(), MarkedDivisor::new(ctx, coeffs)?);
    }
    let q_blocks = p_component
        .iter()
        .map(|(v, d)| {
            let ts: Vec<u32> = blocks.iter().map(|b| b.t).collect();
            (v.clone(), crate::padic::deinterleave(d, &ts))
        })
        .collect();

    let g_x = model.total_genus();
    let edge_count = (gamma.closed_count() + gamma.open_count()) as Coeff;
    let threshold_ok = n > (c_constant(g_x) + 1).max(edge_count);

    Ok(ThreePointFamily { ctx, case, d_global, p_component, q_blocks, threshold_ok })
}

fn tree_median<'a>(
    g: &'a SemiGraph,
    a: &'a VertexId,
    b: &'a VertexId,
    c: &'a VertexId,
) -> &'a VertexId {
    // the unique vertex on all three pairwise paths
    let path_ab: Vec<VertexId> = g
        .minimal_path(a, b)
        .expect("tree")
        .into_iter()
        .filter_map(|i| match i {
            PathItem::Vertex(v) => Some(v),
            _ => None,
        })
        .collect();
    let len = |x: &VertexId, y: &VertexId| {
        SemiGraph::path_length(&g.minimal_path(x, y).expect("tree"))
    };
    for v in &path_ab {
        if len(a, v) + len(v, c) == len(a, c) && len(b, v) + len(v, c) == len(b, c) {
            return g.vertices().find(|w| *w == v).unwrap();
        }
    }
    unreachable!("every vertex triple in a tree has a median")
}

/// Structural checks mirroring [`check_main_family`] for the three-point
/// assembly. Nodes may be doubly unramified here.
pub fn check_three_point_family(model: &CurveModel, fam: &ThreePointFamily) -> FamilyChecks {
    let gamma = &model.graph;
    let n = fam.ctx.n();
    let kernel_global = fam.d_global.is_kernel();
    let kernel_components = fam.p_component.values().all(|d| d.is_kernel());
    let degree_global = fam.d_global.deg() == 2 * n;
    // component degrees are multiples of n bounded by (\#D_v - 1) n
    let degree_components = fam.p_component.iter().all(|(v, d)| {
        let dv = (gamma.open_at(v).len()
            + gamma.closed_at(v).iter().filter(|e| !gamma.is_loop(e)).count())
            as Coeff;
        d.deg() % n == 0 && d.deg() <= (dv.saturating_sub(1)) * n
    });
    let shift_invariant =
        (0..fam.ctx.t()).all(|i| fam.d_global.digit_shift(i).deg() == fam.d_global.deg());
    let node_sums = gamma
        .closed_edges()
        .filter(|(e, _)| !gamma.is_loop(e))
        .all(|(e, (a, b))| {
            let ca = fam.p_component[a].coeff(e);
            let cb = fam.p_component[b].coeff(e);
            (ca + cb).is_multiple_of(n) && ca + cb <= n
        });
    let restriction = fam.p_component.iter().all(|(v, d)| {
        gamma.open_at(v).into_iter().all(|e| d.coeff(&e) == fam.d_global.coeff(&e))
    });
    let all = kernel_global
        && kernel_components
        && degree_global
        && degree_components
        && shift_invariant
        && node_sums
        && restriction;
    FamilyChecks {
        kernel_global,
        kernel_components,
        degree_global,
        degree_components,
        shift_invariant,
        node_sums,
        restriction,
        all,
    }
}

// ---------------------------------------------------------------------------
// Exhaustive search

/// Enumerates every admissible exponent assignment on a curve: exponents on
/// a free set of edges run through an odometer, one open edge is solved
/// from the global kernel condition, spanning-tree node exponents are solved
/// by leaf peeling from the per-component kernel conditions, and the result
/// is verified before being handed to the callback. Returns `false` when
/// the callback aborted the sweep.
pub fn for_each_admissible_exponents(
    model: &CurveModel,
    ctx: DigitContext,
    mut f: impl FnMut(&BTreeMap<EdgeId, Coeff>, &BTreeMap<EdgeId, Coeff>) -> bool,
) -> Result<bool, AssembleError> {
    let g = &model.graph;
    let n = ctx.n();
    let opens: Vec<EdgeId> = g.open_edges().map(|(e, _)| e.clone()).collect();
    let loops: Vec<EdgeId> = g.loop_edges().into_iter().collect();
    let cotree_nonloop: Vec<EdgeId> =
        crate::quasitree::select_e(g, None).expect("connected").into_iter().collect();
    let tree_edges: Vec<EdgeId> = g
        .closed_edges()
        .filter(|(e, (a, b))| a != b && !cotree_nonloop.contains(e))
        .map(|(e, _)| e.clone())
        .collect();

    // peeling order: repeatedly strip tree leaves; each non-root vertex
    // resolves the one tree edge it still touches
    let peel: Vec<(VertexId, EdgeId)> = {
        let mut remaining: BTreeSet<EdgeId> = tree_edges.iter().cloned().collect();
        let mut alive: BTreeSet<VertexId> = g.vertices().cloned().collect();
        let mut order = Vec::new();
        while !remaining.is_empty() {
            let leaf = alive
                .iter()
                .find(|v| {
                    let deg = remaining
                        .iter()
                        .filter(|e| {
                            let (a, b) = g.ends(e).unwrap();
                            a == *v || b == *v
                        })
                        .count();
                    deg == 1
                })
                .cloned()
                .expect("tree has a leaf");
            let e = remaining
                .iter()
                .find(|e| {
                    let (a, b) = g.ends(e).unwrap();
                    *a == leaf || *b == leaf
                })
                .cloned()
                .unwrap();
            remaining.remove(&e);
            alive.remove(&leaf);
            order.push((leaf, e));
        }
        order
    };

    // free variables: all opens except the last, loop exponents, cotree
    // exponents
    let solved_open = opens.last().cloned();
    let free_opens: Vec<EdgeId> =
        opens.iter().take(opens.len().saturating_sub(1)).cloned().collect();
    let free: Vec<EdgeId> = free_opens
        .iter()
        .chain(loops.iter())
        .chain(cotree_nonloop.iter())
        .cloned()
        .collect();

    let branch_value = |e: &EdgeId, at: &VertexId, c: Coeff| -> Coeff {
        let (a, b) = g.ends(e).unwrap();
        if a == b {
            // both branches live here and cancel mod n
            return 0;
        }
        if at == a {
            c
        } else {
            (n - c) % n
        }
    };

    let mut vals: Vec<Coeff> = vec![0; free.len()];
    loop {
        // assemble the candidate
        let mut marked: BTreeMap<EdgeId, Coeff> = BTreeMap::new();
        for (e, &c) in free_opens.iter().zip(&vals) {
            marked.insert(e.clone(), c);
        }
        if let Some(last) = &solved_open {
            let partial: Coeff = marked.values().fold(0, |a, &c| (a + c) % n);
            marked.insert(last.clone(), (n - partial) % n);
        }
        let mut node_exps: BTreeMap<EdgeId, Coeff> = BTreeMap::new();
        for (e, &c) in loops.iter().zip(vals[free_opens.len()..].iter()) {
            node_exps.insert(e.clone(), c);
        }
        for (e, &c) in cotree_nonloop
            .iter()
            .zip(vals[free_opens.len() + loops.len()..].iter())
        {
            node_exps.insert(e.clone(), c);
        }
        // solve the tree edges by peeling
        let mut resolved = node_exps.clone();
        for (v, e) in &peel {
            let mut acc: Coeff = 0;
            for x in g.open_at(v) {
                acc = (acc + marked[&x]) % n;
            }
            for x in g.closed_at(v) {
                if x == *e {
                    continue;
                }
                if let Some(&c) = resolved.get(&x) {
                    acc = (acc + branch_value(&x, v, c)) % n;
                }
            }
            // choose c so that the branch at v is (n - acc) mod n
            let want = (n - acc) % n;
            let (a, _b) = g.ends(e).unwrap();
            let c = if a == v { want } else { (n - want) % n };
            resolved.insert(e.clone(), c);
        }
        // verify every per-vertex condition; the root's is the residual one
        let consistent = g.vertices().all(|v| {
            let mut acc: Coeff = 0;
            for x in g.open_at(v) {
                acc = (acc + marked[&x]) % n;
            }
            for x in g.closed_at(v) {
                let (a, b) = g.ends(&x).unwrap();
                if a == b {
                    continue;
                }
                acc = (acc + branch_value(&x, v, resolved[&x])) % n;
            }
            acc == 0
        });
        if consistent && !f(&marked, &resolved) {
            return Ok(false);
        }
        // advance the odometer
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            vals[k] += 1;
            if vals[k] < n {
                break;
            }
            vals[k] = 0;
            if k == 0 {
                return Ok(true);
            }
        }
    }
}

/// Lazily computed graph terms, shared across every exponent assignment
/// with the same stabilizer profile. Voltages on spanning-tree edges are
/// normalized to zero; cotree voltages sweep the full range.
pub struct GraphTermCache {
    p: u64,
    n: u64,
    cotree: Vec<EdgeId>,
    entries: BTreeMap<(Vec<u64>, Vec<u64>), ProfileEntry>,
}

#[derive(Clone, Debug)]
pub struct ProfileEntry {
    /// (voltage vector on the cotree, graph term, some cycle sum nonzero)
    pub terms: Vec<(Vec<u64>, u64, bool)>,
    /// distinct term values over all voltages / over nonzero cycle sums
    pub distinct_all: Vec<u64>,
    pub distinct_nz: Vec<u64>,
    pub count_all: u64,
    pub count_nz: u64,
}

impl ProfileEntry {
    pub fn max_term(&self, require_nonzero_cycle: bool) -> Option<(u64, &[u64])> {
        self.terms
            .iter()
            .filter(|(_, _, nz)| !require_nonzero_cycle || *nz)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, t, _)| (*t, v.as_slice()))
    }
}

impl GraphTermCache {
    pub fn new(model: &CurveModel, ctx: &DigitContext) -> Result<Self, AssembleError> {
        if ctx.n() > u64::MAX as Coeff {
            return Err(AssembleError::OrderTooLarge(ctx.n()));
        }
        let cotree: Vec<EdgeId> = crate::quasitree::select_e(&model.graph, None)
            .expect("connected")
            .into_iter()
            .chain(model.graph.loop_edges())
            .collect();
        Ok(GraphTermCache { p: model.p, n: ctx.n() as u64, cotree, entries: BTreeMap::new() })
    }

    pub fn cotree(&self) -> &[EdgeId] {
        &self.cotree
    }

    /// Clone of everything computed so far, keyed by (vertex stabilizer
    /// orders in vertex order, edge stabilizer orders in edge order).
    #[allow(clippy::type_complexity)]
    pub fn entries_snapshot(&self) -> Vec<((Vec<u64>, Vec<u64>), ProfileEntry)> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// All graph terms for a stabilizer profile, sweeping cotree voltages.
    pub fn entry(
        &mut self,
        vstab: &BTreeMap<VertexId, u64>,
        estab: &BTreeMap<EdgeId, u64>,
    ) -> Result<&ProfileEntry, AssembleError> {
        let key = (
            vstab.values().copied().collect::<Vec<u64>>(),
            estab.values().copied().collect::<Vec<u64>>(),
        );
        if !self.entries.contains_key(&key) {
            // closed-form trace data: a deck element r fixes a d-element
            // fiber pointwise when d | r; the cover components are the
            // cosets of the subgroup generated by the vertex stabilizers
            // and the cycle sums (tree voltages are already rebased to 0,
            // so the cotree voltages ARE the cycle sums). The verification
            // suites spot-check these terms against the graph-built oracle.
            let n = self.n;
            let vertex_fibers: Vec<u64> = key.0.iter().map(|m| n / m).collect();
            let edge_fibers: Vec<u64> = key.1.iter().map(|m| n / m).collect();
            let stab_gcd = vertex_fibers.iter().fold(n, |a, &d| gcd_u64(a, d));
            let bound = n * (edge_fibers.len() as u64 + 2) + self.p + n;
            let q = crate::field::smallest_prime_one_mod(n, bound);
            let f = crate::field::PrimeField::new(q).expect("prime");
            let omega = f.root_of_unity(n);
            let inv_n = crate::field::Field::inv(&f, &f.elem(n)).expect("nonzero");
            let mut terms = Vec::new();
            let k = self.cotree.len();
            let mut volt = vec![0u64; k];
            loop {
                let comps = volt.iter().fold(stab_gcd, |a, &s| gcd_u64(a, s)).max(1);
                let mut m1 = f.zero();
                for r in 0..n {
                    let mut tr: i64 = 0;
                    for &d in &edge_fibers {
                        if r % d == 0 {
                            tr += d as i64;
                        }
                    }
                    for &d in &vertex_fibers {
                        if r % d == 0 {
                            tr -= d as i64;
                        }
                    }
                    if r % comps == 0 {
                        tr += comps as i64;
                    }
                    let chi = f.pow(omega, ((n - 1) as u128 * r as u128) % n as u128);
                    m1 = crate::field::Field::add(
                        &f,
                        &m1,
                        &crate::field::Field::mul(&f, &f.elem_i64(tr), &chi),
                    );
                }
                let term = crate::field::Field::mul(&f, &m1, &inv_n);
                let nz = volt.iter().any(|&s| s != 0);
                terms.push((volt.clone(), term, nz));
                // advance
                let mut i = k;
                let mut done = k == 0;
                while i > 0 {
                    i -= 1;
                    volt[i] += 1;
                    if volt[i] < self.n {
                        break;
                    }
                    volt[i] = 0;
                    if i == 0 {
                        done = true;
                    }
                }
                if done {
                    break;
                }
            }
            let mut distinct_all: Vec<u64> = terms.iter().map(|t| t.1).collect();
            distinct_all.sort_unstable();
            distinct_all.dedup();
            let mut distinct_nz: Vec<u64> = terms.iter().filter(|t| t.2).map(|t| t.1).collect();
            distinct_nz.sort_unstable();
            distinct_nz.dedup();
            let count_all = terms.len() as u64;
            let count_nz = terms.iter().filter(|t| t.2).count() as u64;
            self.entries.insert(
                key.clone(),
                ProfileEntry { terms, distinct_all, distinct_nz, count_all, count_nz },
            );
        }
        Ok(self.entries.get(&key).unwrap())
    }
}

/// Stabilizer profile of an exponent assignment.
pub fn stabilizer_profile(
    model: &CurveModel,
    ctx: &DigitContext,
    marked: &BTreeMap<EdgeId, Coeff>,
    node_exps: &BTreeMap<EdgeId, Coeff>,
) -> (BTreeMap<VertexId, u64>, BTreeMap<EdgeId, u64>) {
    let n = ctx.n();
    let g = &model.graph;
    let mut vstab = BTreeMap::new();
    for v in g.vertices() {
        let mut acc = n;
        for e in g.open_at(v) {
            acc = gcd_u128(acc, marked[&e]);
        }
        for e in g.closed_at(v) {
            let (a, b) = g.ends(&e).unwrap();
            let c = node_exps[&e];
            if a == b {
                acc = gcd_u128(acc, c);
                acc = gcd_u128(acc, (n - c) % n);
            } else if *v == *a {
                acc = gcd_u128(acc, c);
            } else {
                acc = gcd_u128(acc, (n - c) % n);
            }
        }
        vstab.insert(v.clone(), (n / acc) as u64);
    }
    let estab = node_exps
        .iter()
        .map(|(e, &c)| (e.clone(), (n / gcd_u128(n, c)) as u64))
        .collect();
    (vstab, estab)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchWitness {
    pub marked: BTreeMap<EdgeId, Coeff>,
    pub node_exps: BTreeMap<EdgeId, Coeff>,
    pub voltages: BTreeMap<EdgeId, u64>,
    pub component_gammas: BTreeMap<VertexId, u64>,
    pub graph_term: u64,
    pub gamma: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub target: u64,
    pub best: u64,
    pub attained: bool,
    /// true when the whole space fit in the budget
    pub exhausted: bool,
    /// exponent assignments inspected
    pub evaluated: u64,
    pub witness: Option<SearchWitness>,
}

/// Exhaustive search for a maximizing character on a totally degenerate
/// curve: sweeps admissible exponent data in lexicographic order, pairs
/// each with its best voltage assignment (graph terms cached per stabilizer
/// profile), skips the trivial character, stops early once the theoretical
/// bound is attained. The budget counts exponent assignments.
pub fn search_max(
    model: &CurveModel,
    ctx: DigitContext,
    budget: u64,
) -> Result<SearchOutcome, AssembleError> {
    if !model.is_totally_degenerate() {
        return Err(AssembleError::MissingGamma("positive-genus component".into()));
    }
    if ctx.n() < 2 {
        return Err(AssembleError::OrderTooSmall);
    }
    let g_x = model.total_genus();
    let n_x = model.n_marked() as u64;
    let target = if n_x == 0 { g_x.saturating_sub(1) } else { g_x + n_x - 2 };

    let mut cache = GraphTermCache::new(model, &ctx)?;
    let mut gamma_cache: BTreeMap<(VertexId, Vec<Coeff>), u64> = BTreeMap::new();

    let mut best: u64 = 0;
    let mut witness: Option<SearchWitness> = None;
    let mut evaluated: u64 = 0;
    let mut exhausted = true;
    let mut inner_error: Option<AssembleError> = None;

    let full_sweep = for_each_admissible_exponents(model, ctx, |marked, node_exps| {
        if evaluated >= budget {
            exhausted = false;
            return false;
        }
        evaluated += 1;
        let mut run = || -> Result<bool, AssembleError> {
            let data = AdmissibleCoverData::new(
                model.clone(),
                ctx,
                MarkedDivisor::new(ctx, marked.clone())?,
                node_exps.clone(),
                BTreeMap::new(),
            )?;
            let mut comp_sum = 0u64;
            let mut comp_gammas = BTreeMap::new();
            for v in model.graph.vertices() {
                let key: Vec<Coeff> =
                    data.component_branches(v).iter().map(|(_, c)| *c).collect();
                let gv = match gamma_cache.get(&(v.clone(), key.clone())) {
                    Some(&gv) => gv,
                    None => {
                        let gv = p1cover::gamma(&data.component_cover(v)?)?;
                        gamma_cache.insert((v.clone(), key), gv);
                        gv
                    }
                };
                comp_gammas.insert(v.clone(), gv);
                comp_sum += gv;
            }
            let exps_trivial =
                marked.values().all(|&c| c == 0) && node_exps.values().all(|&c| c == 0);
            let (vstab, estab) = stabilizer_profile(model, &ctx, marked, node_exps);
            let picked = {
                let entry = cache.entry(&vstab, &estab)?;
                entry.max_term(exps_trivial).map(|(t, v)| (t, v.to_vec()))
            };
            let Some((term, volt)) = picked else {
                return Ok(true);
            };
            let total = comp_sum + term;
            if total > best || witness.is_none() {
                best = total;
                witness = Some(SearchWitness {
                    marked: marked.clone(),
                    node_exps: node_exps.clone(),
                    voltages: cache
                        .cotree()
                        .iter()
                        .cloned()
                        .zip(volt.iter().copied())
                        .collect(),
                    component_gammas: comp_gammas,
                    graph_term: term,
                    gamma: total,
                });
            }
            Ok(best < target)
        };
        match run() {
            Ok(keep_going) => keep_going,
            Err(e) => {
                inner_error = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = inner_error {
        return Err(e);
    }
    let _ = full_sweep;
    let attained = best == target && witness.is_some();
    Ok(SearchOutcome { target, best, attained, exhausted, evaluated, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasitree::minimal_quasi_tree;

    fn model(
        vs: &[(&str, u64)],
        closed: &[(&str, &str, &str)],
        open: &[(&str, &str)],
        p: u64,
    ) -> CurveModel {
        let g = SemiGraph::new(
            vs.iter().map(|(v, _)| VertexId(v.to_string())),
            closed.iter().map(|(e, a, b)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(b.to_string()))
            }),
            open.iter().map(|(e, v)| (EdgeId(e.to_string()), VertexId(v.to_string()))),
        )
        .unwrap();
        CurveModel::new_semistable(
            g,
            p,
            vs.iter().map(|(v, g)| (VertexId(v.to_string()), *g)).collect(),
            None,
        )
        .unwrap()
    }

    fn ctx(p: u64, t: u32) -> DigitContext {
        DigitContext::new(p, t).unwrap()
    }

    #[test]
    fn c_constant_values() {
        assert_eq!(c_constant(0), 0);
        assert_eq!(c_constant(1), 1);
        assert_eq!(c_constant(2), 6);
        assert_eq!(c_constant(4), 648);
    }

    /// Two genus-0 components, one node, marks split 2 + 1.
    fn glued_three_marks(p: u64) -> CurveModel {
        model(
            &[("v1", 0), ("v2", 0)],
            &[("a", "v1", "v2")],
            &[("x11", "v1"), ("x12", "v1"), ("x21", "v2")],
            p,
        )
    }

    #[test]
    fn main_family_structure() {
        let c = glued_three_marks(2);
        let qt = minimal_quasi_tree(&c, None).unwrap();
        assert_eq!(qt.gamma, c.graph);
        // edges = 1 closed + 3 open: need n0 > 4
        let fam = build_main_family(&c, &qt, 3).unwrap();
        // labels: one marked pair on v1, plus one cross label per
        // (marked vertex, far mark) pair
        assert_eq!(fam.labels.len(), 4);
        let checks = check_main_family(&c, &qt, &fam);
        assert!(checks.all, "{checks:?}");
        // threshold guard: t0 = 1 gives n0 = 1 <= max(C(0)+1, edges)
        assert!(matches!(
            build_main_family(&c, &qt, 1),
            Err(AssembleError::Threshold(..))
        ));
    }

    #[test]
    fn main_family_on_pruned_curve() {
        // curve with a loop and a prunable branch
        let c = model(
            &[("v1", 0), ("v2", 0), ("v3", 1)],
            &[("a1", "v1", "v2"), ("a2", "v1", "v2"), ("a3", "v2", "v3"), ("c", "v1", "v1")],
            &[("b1", "v1"), ("b2", "v2")],
            2,
        );
        let qt = minimal_quasi_tree(&c, None).unwrap();
        // g = 3 here, so the constant threshold is 55
        let fam = build_main_family(&c, &qt, 6).unwrap();
        let checks = check_main_family(&c, &qt, &fam);
        assert!(checks.all, "{checks:?}");
    }

    #[test]
    fn three_point_cases() {
        let blocks = |p: u64, marks: [&str; 3]| -> [DivisorBlock; 3] {
            // degree 2(p^t - 1) with one maximal coefficient, t = 2
            let n1 = (p as Coeff).pow(2) - 1;
            let mk = |a: Coeff, b: Coeff, c: Coeff| DivisorBlock {
                p,
                t: 2,
                coeffs: BTreeMap::from([
                    (EdgeId(marks[0].to_string()), a),
                    (EdgeId(marks[1].to_string()), b),
                    (EdgeId(marks[2].to_string()), c),
                ]),
            };
            [mk(n1, n1 - 1, 1), mk(n1 - 1, n1, 1), mk(1, n1 - 1, n1)]
        };
        // case (i): two marks on w1, one on w2
        let c1 = glued_three_marks(2);
        let fam1 =
            build_three_point_family(&c1, &blocks(2, ["x11", "x12", "x21"])).unwrap();
        assert_eq!(fam1.case, ThreePointCase::TwoVertex);
        assert!(check_three_point_family(&c1, &fam1).all);
        // case (ii)-(1): chain with one mark per vertex
        let c2 = model(
            &[("v1", 0), ("v2", 0), ("v3", 0)],
            &[("e1", "v1", "v2"), ("e2", "v2", "v3")],
            &[("x1", "v1"), ("x2", "v2"), ("x3", "v3")],
            2,
        );
        let fam2 = build_three_point_family(&c2, &blocks(2, ["x1", "x2", "x3"])).unwrap();
        assert_eq!(fam2.case, ThreePointCase::Chain);
        assert!(check_three_point_family(&c2, &fam2).all);
        // case (ii)-(2): star with central vertex
        let c3 = model(
            &[("v0", 1), ("v1", 0), ("v2", 0), ("v3", 0)],
            &[("e1", "v0", "v1"), ("e2", "v0", "v2"), ("e3", "v0", "v3")],
            &[("x1", "v1"), ("x2", "v2"), ("x3", "v3")],
            2,
        );
        let fam3 = build_three_point_family(&c3, &blocks(2, ["x1", "x2", "x3"])).unwrap();
        assert_eq!(fam3.case, ThreePointCase::Star);
        assert!(check_three_point_family(&c3, &fam3).all);
        // all marks on one vertex
        let c4 = model(
            &[("v", 0)],
            &[],
            &[("x1", "v"), ("x2", "v"), ("x3", "v")],
            2,
        );
        let fam4 = build_three_point_family(&c4, &blocks(2, ["x1", "x2", "x3"])).unwrap();
        assert_eq!(fam4.case, ThreePointCase::SingleVertex);
        assert!(check_three_point_family(&c4, &fam4).all);
    }

    #[test]
    fn three_point_block_constraints_enforced() {
        let c = glued_three_marks(2);
        let bad = DivisorBlock {
            p: 2,
            t: 2,
            coeffs: BTreeMap::from([
                (EdgeId("x11".into()), 1),
                (EdgeId("x12".into()), 1),
                (EdgeId("x21".into()), 1),
            ]),
        };
        assert!(build_three_point_family(&c, &[bad.clone(), bad.clone(), bad]).is_err());
    }

    #[test]
    fn total_gamma_theta_graph() {
        // two genus-0 components joined by three nodes: type (2, 0); the
        // connected split cover contributes only the graph term r - 1 = 1
        let c = model(
            &[("v1", 0), ("v2", 0)],
            &[("e1", "v1", "v2"), ("e2", "v1", "v2"), ("e3", "v1", "v2")],
            &[],
            2,
        );
        let cx = ctx(2, 2);
        let data = AdmissibleCoverData::new(
            c.clone(),
            cx,
            MarkedDivisor::new(cx, BTreeMap::new()).unwrap(),
            BTreeMap::from([
                (EdgeId("e1".into()), 0),
                (EdgeId("e2".into()), 0),
                (EdgeId("e3".into()), 0),
            ]),
            BTreeMap::from([(EdgeId("e2".into()), 1), (EdgeId("e3".into()), 2)]),
        )
        .unwrap();
        assert!(!data.is_trivial_character().unwrap());
        let gammas = data.component_gammas(&BTreeMap::new()).unwrap();
        assert_eq!(gammas.values().sum::<u64>(), 0);
        let total = total_gamma(&data, &gammas).unwrap();
        assert_eq!(total, 1);
        assert_eq!(total, c.total_genus() - 1);
    }

    #[test]
    fn total_gamma_single_vertex() {
        // single (0, 3) component: no graph term
        let c = model(&[("v", 0)], &[], &[("x", "v"), ("y", "v"), ("z", "v")], 2);
        let cx = ctx(2, 3); // n = 7
        let data = AdmissibleCoverData::new(
            c,
            cx,
            MarkedDivisor::new(
                cx,
                BTreeMap::from([
                    (EdgeId("x".into()), 6),
                    (EdgeId("y".into()), 5),
                    (EdgeId("z".into()), 3),
                ]),
            )
            .unwrap(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let gammas = data.component_gammas(&BTreeMap::new()).unwrap();
        let total = total_gamma(&data, &gammas).unwrap();
        assert_eq!(total, 1);
        let rep = check_decomposition(&data).unwrap();
        assert!(rep.global_attains && rep.components_attain && rep.equivalence_holds);
        assert!(rep.bound_holds);
    }

    #[test]
    fn decomposition_submaximal_instance() {
        // the digit-shift-violating divisor (2,2,2) at p=2, t=2 is
        // sub-maximal; the equivalence still holds (both sides false)
        let c = model(&[("v", 0)], &[], &[("x", "v"), ("y", "v"), ("z", "v")], 2);
        let cx = ctx(2, 2);
        let data = AdmissibleCoverData::new(
            c,
            cx,
            MarkedDivisor::new(
                cx,
                BTreeMap::from([
                    (EdgeId("x".into()), 2),
                    (EdgeId("y".into()), 2),
                    (EdgeId("z".into()), 2),
                ]),
            )
            .unwrap(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let rep = check_decomposition(&data).unwrap();
        assert!(!rep.global_attains);
        assert!(!rep.components_attain);
        assert!(rep.equivalence_holds && rep.bound_holds);
    }

    #[test]
    fn admissibility_validation() {
        let c = glued_three_marks(2);
        let cx = ctx(2, 2);
        // component kernel violated: v1 sees 1 + 0 + 1 = 2, not 0 mod 3
        let r = AdmissibleCoverData::new(
            c.clone(),
            cx,
            MarkedDivisor::new(
                cx,
                BTreeMap::from([
                    (EdgeId("x11".into()), 1),
                    (EdgeId("x12".into()), 0),
                    (EdgeId("x21".into()), 2),
                ]),
            )
            .unwrap(),
            BTreeMap::from([(EdgeId("a".into()), 1)]),
            BTreeMap::new(),
        );
        assert!(matches!(r, Err(AssembleError::ComponentNotKernel(..))));
        // valid: v1 branches (1, 0, 2) sum 3, v2 branches (2, 1) sum 3
        let ok = AdmissibleCoverData::new(
            c,
            cx,
            MarkedDivisor::new(
                cx,
                BTreeMap::from([
                    (EdgeId("x11".into()), 1),
                    (EdgeId("x12".into()), 0),
                    (EdgeId("x21".into()), 2),
                ]),
            )
            .unwrap(),
            BTreeMap::from([(EdgeId("a".into()), 2)]),
            BTreeMap::new(),
        )
        .unwrap();
        let spec = ok.derive_cover_spec().unwrap();
        assert_eq!(spec.edge_stab[&EdgeId("a".into())], 3);
    }

    #[test]
    fn exponent_enumeration_counts() {
        // (0, 3): two free marks, third solved: n^2 assignments
        let c = model(&[("v", 0)], &[], &[("x", "v"), ("y", "v"), ("z", "v")], 2);
        let cx = ctx(2, 2);
        let mut count = 0u64;
        for_each_admissible_exponents(&c, cx, |m, _| {
            let s: Coeff = m.values().sum();
            assert_eq!(s % 3, 0);
            count += 1;
            true
        })
        .unwrap();
        assert_eq!(count, 9);
        // loop model (1, 1): mark forced to zero, loop exponent free
        let c = model(&[("v", 0)], &[("l", "v", "v")], &[("b", "v")], 2);
        let mut count = 0u64;
        for_each_admissible_exponents(&c, cx, |m, nd| {
            assert_eq!(m[&EdgeId("b".into())], 0);
            assert!(nd[&EdgeId("l".into())] < 3);
            count += 1;
            true
        })
        .unwrap();
        assert_eq!(count, 3);
    }

    #[test]
    fn search_small_types() {
        // (0,3) at t = 2: no attaining character exists; search stays honest
        let c03 = model(&[("v", 0)], &[], &[("x", "v"), ("y", "v"), ("z", "v")], 2);
        let out = search_max(&c03, ctx(2, 2), 10_000).unwrap();
        assert_eq!(out.target, 1);
        assert_eq!(out.best, 0);
        assert!(!out.attained);
        assert!(out.exhausted);
        // t = 3 attains
        let out = search_max(&c03, ctx(2, 3), 10_000).unwrap();
        assert_eq!(out.best, 1);
        assert!(out.attained);
        let w = out.witness.unwrap();
        assert_eq!(w.gamma, 1);
        // loop model of (1, 1): target 0 is attained immediately
        let c11 = model(&[("v", 0)], &[("l", "v", "v")], &[("b", "v")], 2);
        let out = search_max(&c11, ctx(2, 2), 10_000).unwrap();
        assert_eq!(out.target, 0);
        assert!(out.attained);
        // (1, 2): two components, double edge
        let c12 = model(
            &[("v1", 0), ("v2", 0)],
            &[("e1", "v1", "v2"), ("e2", "v1", "v2")],
            &[("m1", "v1"), ("m2", "v2")],
            2,
        );
        let out = search_max(&c12, ctx(2, 2), 100_000).unwrap();
        assert_eq!(out.target, 1);
        assert!(out.attained, "{out:?}");
    }
}
