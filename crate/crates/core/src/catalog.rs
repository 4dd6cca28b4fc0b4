//! Exhaustive instance catalogs for the verification suites: small base
//! graphs up to isomorphism, cover data up to voltage rebasing, and totally
//! degenerate curve models.

use std::collections::BTreeMap;

use crate::graphcover::CoverSpec;
use crate::semigraph::{CurveModel, EdgeId, SemiGraph, VertexId};

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Vertex-slot encoding of a multigraph: `counts[i][j]` edges between `i`
/// and `j` (loops on the diagonal), plus open-edge counts per vertex.
#[derive(Clone, Debug)]
struct RawGraph {
    nv: usize,
    edges: Vec<(usize, usize)>,
    opens: Vec<usize>,
}

impl RawGraph {
    fn canonical_key(&self) -> Vec<u64> {
        let perms: Vec<Vec<usize>> = permutations(self.nv);
        let mut best: Option<Vec<u64>> = None;
        for perm in &perms {
            let mut edges: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (perm[a], perm[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            edges.sort();
            let mut opens = vec![0usize; self.nv];
            for (v, &c) in self.opens.iter().enumerate() {
                opens[perm[v]] = c;
            }
            let mut key: Vec<u64> = vec![self.nv as u64];
            for (a, b) in &edges {
                key.push(*a as u64);
                key.push(*b as u64);
            }
            key.extend(opens.iter().map(|&c| c as u64));
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        best.unwrap()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.nv];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn to_semigraph(&self) -> SemiGraph {
        let vertices: Vec<VertexId> = (0..self.nv).map(|i| VertexId(format!("v{i}"))).collect();
        let closed: Vec<(EdgeId, VertexId, VertexId)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| (EdgeId(format!("e{k}")), vertices[a].clone(), vertices[b].clone()))
            .collect();
        let mut open = Vec::new();
        let mut m = 0usize;
        for (v, &c) in self.opens.iter().enumerate() {
            for _ in 0..c {
                open.push((EdgeId(format!("m{m}")), vertices[v].clone()));
                m += 1;
            }
        }
        SemiGraph::new(vertices, closed, open).expect("connected by construction")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// All connected multigraphs with at most `max_v` vertices and at most
/// `max_closed` closed edges (loops allowed, no open edges), up to
/// isomorphism.
pub fn base_graphs(max_v: usize, max_closed: usize) -> Vec<SemiGraph> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for nv in 1..=max_v {
        let slots: Vec<(usize, usize)> = (0..nv)
            .flat_map(|i| (i..nv).map(move |j| (i, j)))
            .collect();
        let mut counts = vec![0usize; slots.len()];
        loop {
            let total: usize = counts.iter().sum();
            if total <= max_closed {
                let mut edges = Vec::new();
                for (slot, &c) in slots.iter().zip(&counts) {
                    for _ in 0..c {
                        edges.push(*slot);
                    }
                }
                let raw = RawGraph { nv, edges, opens: vec![0; nv] };
                if raw.is_connected() && seen.insert(raw.canonical_key()) {
                    out.push(raw.to_semigraph());
                }
            }
            // odometer with early overflow cut
            let mut k = counts.len();
            let mut done = counts.is_empty();
            while k > 0 {
                k -= 1;
                counts[k] += 1;
                if counts.iter().sum::<usize>() <= max_closed {
                    break;
                }
                counts[k] = 0;
                if k == 0 {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
    }
    out
}

/// All totally degenerate stable curve models with the given bounds, up to
/// isomorphism. Genus-0 stability forces every vertex to carry at least 3
/// half-edges.
pub fn degenerate_curves(
    p: u64,
    max_v: usize,
    max_marks: usize,
    max_closed: usize,
    max_betti: usize,
) -> Vec<CurveModel> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for nv in 1..=max_v {
        let slots: Vec<(usize, usize)> = (0..nv)
            .flat_map(|i| (i..nv).map(move |j| (i, j)))
            .collect();
        let mut counts = vec![0usize; slots.len()];
        loop {
            let total: usize = counts.iter().sum();
            if total <= max_closed {
                let mut edges = Vec::new();
                for (slot, &c) in slots.iter().zip(&counts) {
                    for _ in 0..c {
                        edges.push(*slot);
                    }
                }
                let raw0 = RawGraph { nv, edges, opens: vec![0; nv] };
                if raw0.is_connected() && total + 1 - nv <= max_betti {
                    // distribute marks
                    let mut opens = vec![0usize; nv];
                    loop {
                        let marks: usize = opens.iter().sum();
                        if marks <= max_marks {
                            let raw = RawGraph { nv, edges: raw0.edges.clone(), opens: opens.clone() };
                            let stable = (0..nv).all(|v| {
                                let deg = raw
                                    .edges
                                    .iter()
                                    .map(|&(a, b)| {
                                        (a == v) as usize + (b == v) as usize
                                    })
                                    .sum::<usize>()
                                    + opens[v];
                                deg >= 3
                            });
                            if stable && seen.insert(raw.canonical_key()) {
                                let g = raw.to_semigraph();
                                let genus: BTreeMap<VertexId, u64> =
                                    g.vertices().map(|v| (v.clone(), 0)).collect();
                                out.push(
                                    CurveModel::new(g, p, genus, None)
                                        .expect("stability checked"),
                                );
                            }
                        }
                        let mut k = opens.len();
                        let mut done = false;
                        while k > 0 {
                            k -= 1;
                            opens[k] += 1;
                            if opens.iter().sum::<usize>() <= max_marks {
                                break;
                            }
                            opens[k] = 0;
                            if k == 0 {
                                done = true;
                            }
                        }
                        if done {
                            break;
                        }
                    }
                }
            }
            let mut k = counts.len();
            let mut done = counts.is_empty();
            while k > 0 {
                k -= 1;
                counts[k] += 1;
                if counts.iter().sum::<usize>() <= max_closed {
                    break;
                }
                counts[k] = 0;
                if k == 0 {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
    }
    out
}

/// All cover data over a base graph for a fixed `n`: stabilizer orders run
/// through all admissible divisor assignments; voltages are normalized to
/// zero on a spanning tree and reduced modulo the subgroup the two endpoint
/// stabilizers generate (different representatives give equivariantly
/// isomorphic covers).
pub fn cover_specs(base: &SemiGraph, n: u64) -> Vec<CoverSpec> {
    let verts: Vec<VertexId> = base.vertices().cloned().collect();
    let edges: Vec<(EdgeId, VertexId, VertexId)> = base
        .closed_edges()
        .map(|(e, (a, b))| (e.clone(), a.clone(), b.clone()))
        .collect();
    let tree: std::collections::BTreeSet<EdgeId> = {
        let cotree = crate::quasitree::select_e(base, None).expect("connected");
        base.closed_edges()
            .filter(|(e, (a, b))| a != b && !cotree.contains(e))
            .map(|(e, _)| e.clone())
            .collect()
    };
    let divs = divisors(n);
    let mut out = Vec::new();
    let mut vchoice = vec![0usize; verts.len()];
    loop {
        let vstab: BTreeMap<VertexId, u64> = verts
            .iter()
            .cloned()
            .zip(vchoice.iter().map(|&i| divs[i]))
            .collect();
        // edge stabilizer options per edge
        let eopts: Vec<Vec<u64>> = edges
            .iter()
            .map(|(_, a, b)| divisors(gcd(vstab[a], vstab[b])))
            .collect();
        let mut echoice = vec![0usize; edges.len()];
        loop {
            let estab: BTreeMap<EdgeId, u64> = edges
                .iter()
                .map(|(e, _, _)| e.clone())
                .zip(echoice.iter().enumerate().map(|(k, &i)| eopts[k][i]))
                .collect();
            // voltage representatives per edge
            let vopts: Vec<Vec<u64>> = edges
                .iter()
                .map(|(e, a, b)| {
                    if tree.contains(e) {
                        vec![0]
                    } else {
                        let reps = gcd(n / vstab[a], n / vstab[b]);
                        (0..reps).collect()
                    }
                })
                .collect();
            let mut wchoice = vec![0usize; edges.len()];
            loop {
                let voltage: BTreeMap<EdgeId, u64> = edges
                    .iter()
                    .map(|(e, _, _)| e.clone())
                    .zip(wchoice.iter().enumerate().map(|(k, &i)| vopts[k][i]))
                    .collect();
                out.push(
                    CoverSpec::new(base.clone(), n, vstab.clone(), estab.clone(), voltage)
                        .expect("validated by construction"),
                );
                if !advance_mixed(&mut wchoice, &vopts) {
                    break;
                }
            }
            if !advance_mixed(&mut echoice, &eopts) {
                break;
            }
        }
        if !advance(&mut vchoice, divs.len()) {
            break;
        }
    }
    out
}

fn advance(choice: &mut [usize], base: usize) -> bool {
    let mut k = choice.len();
    while k > 0 {
        k -= 1;
        choice[k] += 1;
        if choice[k] < base {
            return true;
        }
        choice[k] = 0;
    }
    false
}

fn advance_mixed(choice: &mut [usize], opts: &[Vec<u64>]) -> bool {
    let mut k = choice.len();
    while k > 0 {
        k -= 1;
        choice[k] += 1;
        if choice[k] < opts[k].len() {
            return true;
        }
        choice[k] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_graph_counts() {
        // single vertex: one graph per loop count
        let g1 = base_graphs(1, 3);
        assert_eq!(g1.len(), 4);
        // two vertices: dedup folds the symmetric loop distributions
        let g2 = base_graphs(2, 2);
        // nv=1: 0,1,2 loops; nv=2: (1 edge), (2 edges), (1 edge + 1 loop)
        assert_eq!(g2.len(), 6);
        for g in &g2 {
            assert!(g.vertex_count() <= 2 && g.closed_count() <= 2);
        }
    }

    #[test]
    fn degenerate_catalog_is_stable_and_deduped() {
        let curves = degenerate_curves(2, 2, 3, 3, 2);
        assert!(!curves.is_empty());
        for c in &curves {
            assert!(c.is_totally_degenerate());
            for v in c.graph.vertices() {
                assert!(c.graph.degree(v) >= 3);
            }
        }
        // the wedge of two loops plus nothing else is unstable (degree 4
        // but ... it is stable); single loop alone is excluded
        assert!(curves
            .iter()
            .all(|c| !(c.graph.vertex_count() == 1
                && c.graph.closed_count() == 1
                && c.graph.open_count() == 0)));
    }

    #[test]
    fn cover_spec_enumeration_counts() {
        // single vertex, one loop, n = 2: vstab in {1, 2}
        // vstab 1: estab {1}, voltages {0, 1}; vstab 2: estab {1, 2} x reps
        let g = base_graphs(1, 1).into_iter().find(|g| g.closed_count() == 1).unwrap();
        let specs = cover_specs(&g, 2);
        // (v=1): volt reps gcd(2,2)=2 -> {0,1}, estab {1}: 2 specs
        // (v=2): volt reps gcd(1,1)=1 -> {0}, estab {1,2}: 2 specs
        assert_eq!(specs.len(), 4);
    }
}
