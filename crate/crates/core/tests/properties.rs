//! Property tests across the crate: isomorphism invariance, digit algebra,
//! composition laws, and cross-route consistency of the invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;

use ghw_core::field::{Field, FiniteField};
use ghw_core::gen;
use ghw_core::p1cover::{self, PointP1, RamifiedP1Cover};
use ghw_core::padic::{self, Coeff, DigitContext, DivisorBlock, MarkedDivisor};
use ghw_core::semigraph::{CurveModel, EdgeId, PathItem, SemiGraph, VertexId};

fn small_ctx() -> impl Strategy<Value = DigitContext> {
    prop_oneof![
        Just(DigitContext::new(2, 2).unwrap()),
        Just(DigitContext::new(2, 3).unwrap()),
        Just(DigitContext::new(3, 2).unwrap()),
        Just(DigitContext::new(5, 1).unwrap()),
        Just(DigitContext::new(7, 1).unwrap()),
    ]
}

proptest! {
    #[test]
    fn digit_shift_bijective_and_additive(ctx in small_ctx(), u in 0u64..500, i in 0u32..6, j in 0u32..6) {
        let n = ctx.n();
        let u = (u as Coeff) % (n + 1);
        let t = ctx.t();
        let once = ctx.digit_shift(ctx.digit_shift(u, i % t).unwrap(), j % t).unwrap();
        let combined = ctx.digit_shift(u, (i % t + j % t) % t).unwrap();
        prop_assert_eq!(once, combined);
        // shifting by t is the identity
        prop_assert_eq!(ctx.digit_shift(u, t).unwrap(), u);
    }

    #[test]
    fn twist_group_action(ctx in small_ctx(), coeffs in proptest::collection::vec(0u64..120, 2..5), l1 in 1u64..100, l2 in 1u64..100) {
        let n = ctx.n();
        let coeffs: BTreeMap<EdgeId, Coeff> = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (EdgeId(format!("x{k}")), (c as Coeff) % n))
            .collect();
        let d = MarkedDivisor::new(ctx, coeffs).unwrap();
        let l1 = (l1 as Coeff) % n;
        let l2 = (l2 as Coeff) % n;
        prop_assume!(l1 != 0 && l2 != 0 && (l1 * l2) % n != 0);
        let a = d.twist(l1).unwrap().twist(l2).unwrap();
        let b = d.twist((l1 * l2) % n).unwrap();
        prop_assert_eq!(a, b);
        // the p-power twist agrees with the digit shift
        let p_pow = (ctx.p() as Coeff).pow(ctx.t() - 1) % n;
        if p_pow != 0 {
            prop_assert_eq!(d.twist(p_pow).unwrap(), d.digit_shift(1));
        }
    }

    #[test]
    fn interleave_roundtrip(parts in proptest::collection::vec((1u32..3, proptest::collection::vec(0u64..8, 3)), 1..4)) {
        let p = 3u64;
        let blocks: Vec<DivisorBlock> = parts
            .iter()
            .map(|(t, vals)| DivisorBlock {
                p,
                t: *t,
                coeffs: vals
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        (EdgeId(format!("x{k}")), (v as Coeff) % (p as Coeff).pow(*t))
                    })
                    .collect(),
            })
            .collect();
        match padic::interleave(&blocks) {
            Ok(d) => {
                let ts: Vec<u32> = blocks.iter().map(|b| b.t).collect();
                prop_assert_eq!(padic::deinterleave(&d, &ts), blocks);
            }
            Err(_) => {
                // rejected only when some stacked coefficient reaches n
                let total: u32 = blocks.iter().map(|b| b.t).sum();
                let n = (p as Coeff).pow(total) - 1;
                let hit_n = (0..3).any(|k| {
                    let mut acc = 0 as Coeff;
                    let mut scale = 1 as Coeff;
                    for b in &blocks {
                        acc += scale * b.coeffs[&EdgeId(format!("x{k}"))];
                        scale *= (p as Coeff).pow(b.t);
                    }
                    acc >= n
                });
                prop_assert!(hit_n);
            }
        }
    }

    #[test]
    fn betti_is_isomorphism_invariant(seed in 0u64..500) {
        let mut rng = gen::rng(seed);
        let g = gen::random_semigraph(&mut rng, 5);
        // relabel everything by value-preserving bijections
        let vmap: BTreeMap<VertexId, VertexId> = g
            .vertices()
            .map(|v| (v.clone(), VertexId(format!("W{}_{}", seed % 7, v.0))))
            .collect();
        let emap: BTreeMap<EdgeId, EdgeId> = g
            .closed_edges()
            .map(|(e, _)| e.clone())
            .chain(g.open_edges().map(|(e, _)| e.clone()))
            .map(|e| (e.clone(), EdgeId(format!("Z{}_{}", seed % 5, e.0))))
            .collect();
        let h = g.relabel(&vmap, &emap).unwrap();
        prop_assert_eq!(g.betti_number(), h.betti_number());
        prop_assert_eq!(g.loop_edges().len(), h.loop_edges().len());
        prop_assert_eq!(g.open_count(), h.open_count());
    }

    #[test]
    fn minimal_paths_reverse(seed in 0u64..300) {
        let mut rng = gen::rng(seed);
        let model = gen::random_stable_curve(&mut rng, 5, 2, false, 0);
        let g = &model.graph;
        prop_assume!(g.loopless_is_tree());
        let verts: Vec<VertexId> = g.vertices().cloned().collect();
        for v in &verts {
            for w in &verts {
                let mut forward = g.minimal_path(v, w).unwrap();
                let backward = g.minimal_path(w, v).unwrap();
                forward.reverse();
                prop_assert_eq!(&forward, &backward);
            }
        }
    }

    #[test]
    fn bridge_composition_adds_genera(seed in 0u64..200) {
        let mut rng = gen::rng(seed);
        let a = gen::random_stable_curve(&mut rng, 2, 2, false, 1);
        let b = gen::random_stable_curve(&mut rng, 2, 2, false, 1);
        // join disjoint copies with one new closed edge
        let vertices: Vec<VertexId> = a
            .graph
            .vertices()
            .map(|v| VertexId(format!("A{}", v.0)))
            .chain(b.graph.vertices().map(|v| VertexId(format!("B{}", v.0))))
            .collect();
        let closed: Vec<(EdgeId, VertexId, VertexId)> = a
            .graph
            .closed_edges()
            .map(|(e, (x, y))| {
                (EdgeId(format!("A{}", e.0)), VertexId(format!("A{}", x.0)), VertexId(format!("A{}", y.0)))
            })
            .chain(b.graph.closed_edges().map(|(e, (x, y))| {
                (EdgeId(format!("B{}", e.0)), VertexId(format!("B{}", x.0)), VertexId(format!("B{}", y.0)))
            }))
            .chain(std::iter::once((
                EdgeId("bridge".into()),
                VertexId(format!("A{}", a.graph.vertices().next().unwrap().0)),
                VertexId(format!("B{}", b.graph.vertices().next().unwrap().0)),
            )))
            .collect();
        let open: Vec<(EdgeId, VertexId)> = a
            .graph
            .open_edges()
            .map(|(e, v)| (EdgeId(format!("A{}", e.0)), VertexId(format!("A{}", v.0))))
            .chain(
                b.graph
                    .open_edges()
                    .map(|(e, v)| (EdgeId(format!("B{}", e.0)), VertexId(format!("B{}", v.0)))),
            )
            .collect();
        let joined = SemiGraph::new(vertices, closed, open).unwrap();
        let genus: BTreeMap<VertexId, u64> = a
            .graph
            .vertices()
            .map(|v| (VertexId(format!("A{}", v.0)), a.genus_of(v)))
            .chain(b.graph.vertices().map(|v| (VertexId(format!("B{}", v.0)), b.genus_of(v))))
            .collect();
        let m = CurveModel::new_semistable(joined, 2, genus, None).unwrap();
        prop_assert_eq!(m.total_genus(), a.total_genus() + b.total_genus());
        prop_assert_eq!(m.total_p_rank(), a.total_p_rank() + b.total_p_rank());
    }

    #[test]
    fn gamma_is_mobius_invariant(lam_v in 2u64..9, m in 0usize..4) {
        let field = FiniteField::new(3, 2).unwrap();
        let ctx = DigitContext::new(3, 1).unwrap();
        let lam = field.elem(lam_v as u128);
        prop_assume!(!field.is_zero(&lam) && lam != field.one());
        let cover = RamifiedP1Cover::new(
            ctx,
            field.clone(),
            vec![
                PointP1::Finite(field.zero()),
                PointP1::Finite(field.one()),
                PointP1::Infinity,
                PointP1::Finite(lam),
            ],
            vec![1, 1, 1, 1],
        )
        .unwrap();
        let maps: [[u128; 4]; 4] = [[1, 4, 0, 1], [0, 1, 1, 0], [2, 1, 1, 7], [1, 0, 3, 1]];
        let mv = maps[m];
        let mat = [field.elem(mv[0]), field.elem(mv[1]), field.elem(mv[2]), field.elem(mv[3])];
        let det = field.sub(&field.mul(&mat[0], &mat[3]), &field.mul(&mat[1], &mat[2]));
        prop_assume!(!field.is_zero(&det));
        let moved = cover.mobius(&mat).unwrap();
        prop_assert_eq!(p1cover::gamma(&cover).unwrap(), p1cover::gamma(&moved).unwrap());
    }

    #[test]
    fn quasi_tree_path_alternation(seed in 0u64..200) {
        let mut rng = gen::rng(seed);
        let model = gen::random_stable_curve(&mut rng, 2, 4, false, 1);
        let qt = ghw_core::quasitree::minimal_quasi_tree(&model, None).unwrap();
        prop_assume!(!qt.gamma.is_empty());
        let verts: Vec<VertexId> = qt.gamma.vertices().cloned().collect();
        let path = qt.gamma.minimal_path(&verts[0], verts.last().unwrap()).unwrap();
        // alternates vertex, edge, vertex, ...
        for (k, item) in path.iter().enumerate() {
            match (k % 2, item) {
                (0, PathItem::Vertex(_)) | (1, PathItem::Edge(_)) => {}
                _ => prop_assert!(false, "path does not alternate"),
            }
        }
    }
}
