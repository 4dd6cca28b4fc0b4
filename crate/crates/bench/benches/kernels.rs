//! Benchmarks for the exact kernels the searches lean on: finite-field
//! rank, stable rank of semilinear operators, graph-cover eigenspaces,
//! digit calculus, and a small end-to-end search.

use std::collections::BTreeMap;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ghw_core::assembler::{search_max, GraphTermCache};
use ghw_core::field::{Field, FiniteField, PrimeField};
use ghw_core::graphcover::{build_cover, eigenspace_dims, CoverSpec};
use ghw_core::matrix::Matrix;
use ghw_core::p1cover::{gamma, PointP1, RamifiedP1Cover};
use ghw_core::padic::DigitContext;
use ghw_core::semigraph::{CurveModel, EdgeId, SemiGraph, VertexId};

fn rank_over_prime_field(c: &mut Criterion) {
    let f = PrimeField::new(10_007).unwrap();
    let n = 64;
    let m = Matrix::from_fn(n, n, |i, j| ((i * 31 + j * 17 + i * j) % 10_007) as u64);
    c.bench_function("rank 64x64 GF(10007)", |b| {
        b.iter(|| black_box(&m).rank(&f))
    });
}

fn stable_rank_semilinear(c: &mut Criterion) {
    // an 8-point cover of the line over GF(16), n = 15
    let ctx = DigitContext::new(2, 4).unwrap();
    let field = FiniteField::new(2, 4).unwrap();
    let mut points = vec![
        PointP1::Finite(field.zero()),
        PointP1::Finite(field.one()),
        PointP1::Infinity,
    ];
    for v in 2..7u128 {
        points.push(PointP1::Finite(field.elem(v)));
    }
    let exps: Vec<u128> = vec![11, 7, 14, 13, 4, 8, 3];
    let deg: u128 = exps.iter().sum();
    assert_eq!(deg % 15, 0);
    let cover = RamifiedP1Cover::new(ctx, field, points[..7].to_vec(), exps).unwrap();
    c.bench_function("gamma 8-point cover n=15", |b| b.iter(|| gamma(black_box(&cover))));
}

fn cover_eigenspaces(c: &mut Criterion) {
    let base = SemiGraph::new(
        ["v1", "v2"].iter().map(|v| VertexId(v.to_string())),
        [("e1", "v1", "v2"), ("e2", "v1", "v2"), ("e3", "v1", "v1")]
            .iter()
            .map(|(e, a, b)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(b.to_string()))
            }),
        [],
    )
    .unwrap();
    let spec = CoverSpec::new(
        base,
        6,
        BTreeMap::new(),
        BTreeMap::new(),
        BTreeMap::from([(EdgeId("e2".into()), 1), (EdgeId("e3".into()), 5)]),
    )
    .unwrap();
    c.bench_function("eigenspace dims n=6 double oracle", |b| {
        b.iter(|| eigenspace_dims(&build_cover(black_box(&spec)), 5))
    });
}

fn digit_ops(c: &mut Criterion) {
    let ctx = DigitContext::new(3, 12).unwrap();
    let n = ctx.n();
    c.bench_function("digit shift sweep p=3 t=12", |b| {
        b.iter(|| {
            let mut acc = 0u128;
            for u in (0..n).step_by(1000) {
                acc ^= ctx.digit_shift(black_box(u), 5).unwrap();
            }
            acc
        })
    });
}

fn small_search(c: &mut Criterion) {
    let graph = SemiGraph::new(
        ["v"].iter().map(|v| VertexId(v.to_string())),
        [],
        [("x", "v"), ("y", "v"), ("z", "v")]
            .iter()
            .map(|(e, v)| (EdgeId(e.to_string()), VertexId(v.to_string()))),
    )
    .unwrap();
    let model = CurveModel::new(
        graph,
        2,
        BTreeMap::from([(VertexId("v".into()), 0)]),
        None,
    )
    .unwrap();
    let ctx = DigitContext::new(2, 3).unwrap();
    c.bench_function("search (0,3) n=7", |b| {
        b.iter(|| search_max(black_box(&model), ctx, 1_000_000))
    });
    c.bench_function("graph term cache n=7 loop profile", |b| {
        let loop_graph = SemiGraph::new(
            ["v"].iter().map(|v| VertexId(v.to_string())),
            [("l", "v", "v")].iter().map(|(e, a, bb)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(bb.to_string()))
            }),
            [("x", "v")].iter().map(|(e, v)| (EdgeId(e.to_string()), VertexId(v.to_string()))),
        )
        .unwrap();
        let loop_model = CurveModel::new(
            loop_graph,
            2,
            BTreeMap::from([(VertexId("v".into()), 0)]),
            None,
        )
        .unwrap();
        b.iter(|| {
            let mut cache = GraphTermCache::new(&loop_model, &ctx).unwrap();
            let vstab = BTreeMap::from([(VertexId("v".into()), 7u64)]);
            let estab = BTreeMap::from([(EdgeId("l".into()), 1u64)]);
            cache.entry(black_box(&vstab), &estab).unwrap().count_all
        })
    });
}

criterion_group!(
    benches,
    rank_over_prime_field,
    stable_rank_semilinear,
    cover_eigenspaces,
    digit_ops,
    small_search
);
criterion_main!(benches);
