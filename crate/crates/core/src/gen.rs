//! Seeded random instances for the property suites. ChaCha keeps the
//! streams identical across platforms, so reports stay byte-stable for a
//! fixed seed.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::semigraph::{CurveModel, EdgeId, SemiGraph, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected semi-graph: a random tree plus extra edges, loops and
/// open edges.
pub fn random_semigraph(rng: &mut ChaCha8Rng, max_vertices: usize) -> SemiGraph {
    let nv = rng.gen_range(1..=max_vertices.max(1));
    let vertices: Vec<VertexId> = (0..nv).map(|i| VertexId(format!("v{i}"))).collect();
    let mut closed: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
    let mut eid = 0usize;
    for i in 1..nv {
        let j = rng.gen_range(0..i);
        closed.push((EdgeId(format!("e{eid}")), vertices[j].clone(), vertices[i].clone()));
        eid += 1;
    }
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..nv);
        let b = rng.gen_range(0..nv);
        closed.push((EdgeId(format!("e{eid}")), vertices[a].clone(), vertices[b].clone()));
        eid += 1;
    }
    let mut open: Vec<(EdgeId, VertexId)> = Vec::new();
    for k in 0..rng.gen_range(0..=4) {
        let v = rng.gen_range(0..nv);
        open.push((EdgeId(format!("m{k}")), vertices[v].clone()));
    }
    SemiGraph::new(vertices, closed, open).expect("constructed connected")
}

/// Random stable curve model; genera are padded where stability needs them.
pub fn random_stable_curve(
    rng: &mut ChaCha8Rng,
    p: u64,
    max_vertices: usize,
    totally_degenerate: bool,
    min_marks: usize,
) -> CurveModel {
    loop {
        let g = random_semigraph(rng, max_vertices);
        if g.open_count() < min_marks {
            continue;
        }
        let mut genus: BTreeMap<VertexId, u64> = BTreeMap::new();
        let mut ok = true;
        for v in g.vertices() {
            let deg = g.degree(v) as i64;
            if totally_degenerate {
                if deg <= 2 {
                    ok = false;
                    break;
                }
                genus.insert(v.clone(), 0);
            } else {
                let need = if deg >= 3 { 0 } else { ((3 - deg) as u64).div_ceil(2) };
                genus.insert(v.clone(), need + rng.gen_range(0..=1));
            }
        }
        if !ok {
            continue;
        }
        if let Ok(m) = CurveModel::new(g, p, genus, None) {
            return m;
        }
    }
}
