//! Bundled verification suites. Each returns a [`Report`]; the acceptance
//! tests and the CLI `verify-suite` command both run these.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::anabelian;
use crate::assembler::{
    self, build_main_family, build_three_point_family, check_main_family,
    check_three_point_family, for_each_admissible_exponents, search_max, stabilizer_profile,
    GraphTermCache,
};
use crate::catalog;
use crate::field::{Field, FiniteField};
use crate::gen;
use crate::graphcover::{
    build_cover, check_single_vertex, check_topological, check_two_vertex,
    cyclic_shift_eigendims, eigenspace_dims, is_connected_cover,
    total_betti, CoverSpec,
};
use crate::p1cover::{self, PointP1, RamifiedP1Cover};
use crate::padic::{self, Coeff, DigitContext, DivisorBlock, MarkedDivisor};
use crate::quasitree::{minimal_quasi_tree, quasi_tree_model};
use crate::report::{Check, Report};
use crate::semigraph::{CurveModel, EdgeId, VertexId};

/// Graph-cover eigenspace suite: on every small base graph and admissible
/// cover datum, the two eigenspace computations agree; the closed formulas
/// hold in their hypotheses; dimensions sum to the Betti number and are
/// constant on character orbits.
pub fn suite_cover_formulas(max_v: usize, max_e: usize, ns: &[u64], char_p: u64) -> Report {
    let mut report = Report::new("verify-suite cover").with_inputs(serde_json::json!({
        "max_vertices": max_v, "max_closed_edges": max_e, "n": ns, "char_p": char_p,
    }));
    let graphs = catalog::base_graphs(max_v, max_e);
    let cells: Vec<(usize, u64)> = (0..graphs.len())
        .flat_map(|gi| ns.iter().map(move |&n| (gi, n)))
        .collect();
    let results: Vec<(u64, u64, u64, u64, Vec<String>)> = cells
        .par_iter()
        .map(|&(gi, n)| {
            let base = &graphs[gi];
            let mut specs_checked = 0u64;
            let mut agreements = 0u64;
            let mut formula_checked = 0u64;
            let mut sampled_raw = 0u64;
            let mut failures: Vec<String> = Vec::new();
            for (k, spec) in catalog::cover_specs(base, n).into_iter().enumerate() {
                specs_checked += 1;
                let cover = build_cover(&spec);
                let dims = match eigenspace_dims(&cover, char_p) {
                    Ok(d) => d,
                    Err(e) => {
                        failures.push(format!("graph {gi} n {n} spec {k}: {e}"));
                        continue;
                    }
                };
                agreements += 1;
                if dims.iter().sum::<u64>() != total_betti(&cover.total) {
                    failures.push(format!("graph {gi} n {n} spec {k}: betti sum"));
                }
                for j in 0..n {
                    let orbit = gcd(j, n) % n;
                    if dims[j as usize] != dims[orbit as usize] {
                        failures.push(format!("graph {gi} n {n} spec {k}: orbit at {j}"));
                    }
                }
                if is_connected_cover(&spec) {
                    if base.vertex_count() == 1 {
                        let chk = check_single_vertex(&spec, char_p).expect("computable");
                        formula_checked += 1;
                        if !chk.pass {
                            failures.push(format!(
                                "graph {gi} n {n} spec {k}: single-vertex {} != {}",
                                chk.got, chk.expected
                            ));
                        }
                    } else if base.vertex_count() == 2 && base.loop_edges().is_empty() {
                        let chk = check_two_vertex(&spec, char_p).expect("computable");
                        formula_checked += 1;
                        if !chk.pass {
                            failures.push(format!(
                                "graph {gi} n {n} spec {k}: two-vertex {} != {}",
                                chk.got, chk.expected
                            ));
                        }
                    }
                    if spec.vertex_stab.values().all(|&m| m == 1)
                        && spec.edge_stab.values().all(|&m| m == 1)
                    {
                        formula_checked += 1;
                        for chk in check_topological(&spec, char_p).expect("computable") {
                            if !chk.pass {
                                failures.push(format!(
                                    "graph {gi} n {n} spec {k}: topological {}",
                                    chk.details
                                ));
                            }
                        }
                    }
                }
                // sampled raw-voltage pass: shifting a cotree voltage inside
                // the subgroup generated by the endpoint stabilizers, or
                // re-basing along the tree, must not change the dimensions
                if k % 37 == 0 {
                    sampled_raw += 1;
                    let mut volt = spec.voltage.clone();
                    for (e, (a, b)) in spec.base.closed_edges() {
                        let step = (n / spec.vertex_stab[a]).min(n / spec.vertex_stab[b]);
                        let v = volt.get_mut(e).unwrap();
                        *v = (*v + step) % n;
                    }
                    let shifted = CoverSpec::new(
                        spec.base.clone(),
                        n,
                        spec.vertex_stab.clone(),
                        spec.edge_stab.clone(),
                        volt,
                    )
                    .expect("valid");
                    let dims2 = eigenspace_dims(&build_cover(&shifted), char_p)
                        .expect("computable");
                    if dims2 != dims {
                        failures.push(format!("graph {gi} n {n} spec {k}: raw voltage class"));
                    }
                }
            }
            (specs_checked, agreements, formula_checked, sampled_raw, failures)
        })
        .collect();
    let specs: u64 = results.iter().map(|r| r.0).sum();
    let agreements: u64 = results.iter().map(|r| r.1).sum();
    let formulas: u64 = results.iter().map(|r| r.2).sum();
    let sampled: u64 = results.iter().map(|r| r.3).sum();
    let failures: Vec<String> = results.into_iter().flat_map(|r| r.4).collect();
    report = report.with_results(serde_json::json!({
        "graphs": graphs.len(),
        "specs": specs,
        "formula_instances": formulas,
        "raw_voltage_samples": sampled,
    }));
    report.push(Check::new(
        "eigenspace-oracle-agreement",
        agreements == specs,
        format!("{agreements}/{specs} cover data agree across the two computations"),
    ));
    report.push(Check::new(
        "eigenspace-closed-formulas",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{formulas} formula instances verified")
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
    ));
    report
}

/// The standalone cyclic-shift action: `dim V(j) = 0` iff `s | j`.
pub fn suite_cyclic_shift(max_product: u64, char_p: u64) -> Report {
    let mut report = Report::new("verify-suite shift-action")
        .with_inputs(serde_json::json!({ "max_product": max_product, "char_p": char_p }));
    let mut instances = 0u64;
    let mut ok = true;
    let mut detail = String::new();
    for s in 1..=max_product {
        for t in 1..=max_product {
            if s * t > max_product {
                continue;
            }
            let dims = cyclic_shift_eigendims(s, t, char_p);
            instances += 1;
            for (j, &d) in dims.iter().enumerate() {
                let expected = if (j as u64).is_multiple_of(s) { 0 } else { 1 };
                if d != expected {
                    ok = false;
                    detail = format!("(s, t) = ({s}, {t}), j = {j}: {d} != {expected}");
                }
            }
        }
    }
    report = report.with_results(serde_json::json!({ "instances": instances }));
    report.push(Check::new(
        "cyclic-shift-eigenspaces",
        ok,
        if ok { format!("{instances} (s, t) pairs verified") } else { detail },
    ));
    report
}

/// The four-point family on the line: the theta certificate fails exactly
/// at the supersingular parameters, as determined by point counting.
pub fn suite_lambda() -> Report {
    let mut report = Report::new("verify-suite lambda");
    let mut details = Vec::new();
    let mut all_ok = true;
    for (p, r) in [(3u64, 2usize), (5, 2)] {
        let field = FiniteField::new(p, r).expect("valid field");
        let ctx = DigitContext::new(p, 1).expect("valid context");
        let exp = (p as Coeff - 1) / 2;
        let mut tested = 0u64;
        let mut ordinary_count = 0u64;
        let mut ok = true;
        for lam in field.elements() {
            if field.is_zero(&lam) || lam == field.one() {
                continue;
            }
            let cover = RamifiedP1Cover::new(
                ctx,
                field.clone(),
                vec![
                    PointP1::Finite(field.zero()),
                    PointP1::Finite(field.one()),
                    PointP1::Infinity,
                    PointP1::Finite(lam.clone()),
                ],
                vec![exp; 4],
            )
            .expect("valid cover");
            let theta = p1cover::theta_exists(&cover).expect("computable");
            let ordinary = p1cover::elliptic_is_ordinary(&field, &lam);
            tested += 1;
            if ordinary {
                ordinary_count += 1;
            }
            if theta != ordinary {
                ok = false;
                all_ok = false;
            }
        }
        details.push(format!(
            "p = {p}: {tested} parameters, {ordinary_count} ordinary, match = {ok}"
        ));
    }
    report = report.with_results(serde_json::json!({ "fields": ["GF(9)", "GF(25)"] }));
    report.push(Check::new("theta-vs-point-count", all_ok, details.join("; ")));
    report
}

/// Exhaustive digit-condition equivalence: over the stated contexts, for
/// every kernel divisor with maximal `s`, shift-invariant degree holds
/// exactly when every digit column sums to `(n_X - 1)(p - 1)`.
pub fn suite_digit_condition() -> Report {
    let mut report = Report::new("verify-suite digit-condition");
    let cells: Vec<(u64, u32, usize)> = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| (1..=3u32).map(move |t| (p, t)))
        .flat_map(|(p, t)| (2..=4usize).map(move |nx| (p, t, nx)))
        .collect();
    let results: Vec<(u64, u64, bool)> = cells
        .par_iter()
        .map(|&(p, t, nx)| {
            let ctx = DigitContext::new(p, t).expect("valid");
            let n = ctx.n();
            let target = (nx as Coeff - 1) * n;
            let mut divisors = 0u64;
            let mut passing = 0u64;
            let mut ok = true;
            // enumerate free coefficients; the last is forced by the degree
            let mut vals = vec![0 as Coeff; nx - 1];
            loop {
                let partial: Coeff = vals.iter().sum();
                if partial <= target && target - partial < n {
                    let mut full = vals.clone();
                    full.push(target - partial);
                    divisors += 1;
                    let rep = padic::necessary_condition_raw(ctx, &full, nx)
                        .expect("kernel by construction");
                    if rep.holds != rep.degree_invariant {
                        ok = false;
                    }
                    if rep.holds {
                        passing += 1;
                    }
                }
                let mut k = vals.len();
                let mut done = vals.is_empty();
                while k > 0 {
                    k -= 1;
                    vals[k] += 1;
                    if vals[k] < n {
                        break;
                    }
                    vals[k] = 0;
                    if k == 0 {
                        done = true;
                    }
                }
                if done {
                    break;
                }
            }
            (divisors, passing, ok)
        })
        .collect();
    let total: u64 = results.iter().map(|r| r.0).sum();
    let passing: u64 = results.iter().map(|r| r.1).sum();
    let ok = results.iter().all(|r| r.2);
    report = report.with_results(serde_json::json!({
        "divisors": total, "digit_balanced": passing,
    }));
    report.push(Check::new(
        "digit-column-equivalence",
        ok,
        format!("{total} divisors swept, {passing} balanced"),
    ));
    report
}

/// Split-value identities on every digit-balanced divisor with 3 or 4
/// points from the digit-condition sweep.
pub fn suite_split_identities() -> Report {
    let mut report = Report::new("verify-suite split-identities");
    let mut instances = 0u64;
    let mut ok = true;
    let mut first_fail = String::new();
    for p in [2u64, 3, 5] {
        for t in 1..=3u32 {
            let ctx = DigitContext::new(p, t).expect("valid");
            let n = ctx.n();
            for nx in [3usize, 4] {
                let target = (nx as Coeff - 1) * n;
                let points: Vec<EdgeId> = (0..nx).map(|i| EdgeId(format!("x{i}"))).collect();
                let mut vals = vec![0 as Coeff; nx - 1];
                loop {
                    let partial: Coeff = vals.iter().sum();
                    if partial <= target && target - partial < n {
                        let mut full = vals.clone();
                        full.push(target - partial);
                        let rep = padic::necessary_condition_raw(ctx, &full, nx)
                            .expect("kernel by construction");
                        if rep.holds {
                            let d = MarkedDivisor::new(
                                ctx,
                                points.iter().cloned().zip(full.iter().copied()).collect(),
                            )
                            .expect("in range");
                            let split = padic::lemma_split(&d, &points).expect("regime holds");
                            instances += 1;
                            if !split.all_hold {
                                ok = false;
                                if first_fail.is_empty() {
                                    first_fail = format!("p={p} t={t} D={full:?}");
                                }
                            }
                        }
                    }
                    let mut k = vals.len();
                    let mut done = vals.is_empty();
                    while k > 0 {
                        k -= 1;
                        vals[k] += 1;
                        if vals[k] < n {
                            break;
                        }
                        vals[k] = 0;
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
    }
    report = report.with_results(serde_json::json!({ "instances": instances }));
    report.push(Check::new(
        "split-identities",
        ok,
        if ok { format!("{instances} divisors verified") } else { first_fail },
    ));
    report
}

/// Decomposition equivalence at desk scale: on every cataloged totally
/// degenerate curve and every admissible character datum, the global
/// invariant attains its bound exactly when every component does, and the
/// bound itself is never exceeded. A deterministic subsample re-runs the
/// graph term through the double-oracle path.
pub fn suite_decomposition(ts: &[u32], max_v: usize, max_marks: usize) -> Report {
    let p = 2u64;
    let mut report = Report::new("verify-suite decomposition").with_inputs(serde_json::json!({
        "p": p, "t": ts, "max_vertices": max_v, "max_marks": max_marks,
    }));
    let curves = catalog::degenerate_curves(p, max_v, max_marks, 4, 2);
    let cells: Vec<(usize, u32)> = (0..curves.len())
        .flat_map(|ci| ts.iter().map(move |&t| (ci, t)))
        .collect();
    let results: Vec<Result<(u64, u64), String>> = cells
        .par_iter()
        .map(|&(ci, t)| decomposition_cell(&curves[ci], p, t))
        .collect();
    let mut checked = 0u64;
    let mut sampled = 0u64;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((c, s)) => {
                checked += c;
                sampled += s;
            }
            Err(e) => failures.push(e),
        }
    }
    report = report.with_results(serde_json::json!({
        "curves": curves.len(),
        "data_checked": checked,
        "double_oracle_samples": sampled,
    }));
    report.push(Check::new(
        "gamma-decomposition-equivalence",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} admissible data verified on {} curves", curves.len())
        } else {
            failures[0].clone()
        },
    ));
    report
}

/// One `(curve, t)` cell of the decomposition sweep. Branch layouts, point
/// coordinates and coefficient fields are precomputed per component; graph
/// terms come from the profile cache; a deterministic subsample re-derives
/// the graph term through the double-oracle path.
pub fn decomposition_cell(model: &CurveModel, p: u64, t: u32) -> Result<(u64, u64), String> {
    use std::collections::HashMap;
    let ctx = DigitContext::new(p, t).map_err(|e| e.to_string())?;
    let n = ctx.n();
    let g_x = model.total_genus();
    let mut cache = GraphTermCache::new(model, &ctx).map_err(|e| e.to_string())?;

    // per-vertex branch layout: (edge id, open?, second-branch?) in the
    // same order component covers use
    struct Component {
        sources: Vec<(EdgeId, bool, bool)>,
        field: FiniteField,
        points: Vec<PointP1>,
    }
    let verts: Vec<VertexId> = model.graph.vertices().cloned().collect();
    let comps: Vec<Component> = verts
        .iter()
        .map(|v| {
            let g = &model.graph;
            let mut sources: Vec<(EdgeId, bool, bool)> = Vec::new();
            for e in g.open_at(v) {
                sources.push((e, true, false));
            }
            for e in g.closed_at(v) {
                let (a, b) = g.ends(&e).unwrap();
                if a == b {
                    sources.push((e.clone(), false, false));
                    sources.push((e, false, true));
                } else {
                    sources.push((e.clone(), false, b == v));
                }
            }
            let m = sources.len();
            let mut r = 1usize;
            while (p as u128).pow(r as u32) + 1 < m as u128 {
                r += 1;
            }
            let field = FiniteField::new(p, r).expect("valid field");
            let mut points = Vec::with_capacity(m);
            let mut next = 2u128;
            for k in 0..m {
                points.push(match k {
                    0 => PointP1::Finite(field.zero()),
                    1 => PointP1::Finite(field.one()),
                    2 => PointP1::Infinity,
                    _ => {
                        let pt = PointP1::Finite(field.elem(next));
                        next += 1;
                        pt
                    }
                });
            }
            Component { sources, field, points }
        })
        .collect();

    let mut gamma_cache: HashMap<(usize, Vec<Coeff>), u64> = HashMap::new();
    let mut checked = 0u64;
    let mut sampled = 0u64;
    let mut failure: Option<String> = None;
    let sweep = for_each_admissible_exponents(model, ctx, |marked, node_exps| {
        let mut run = || -> Result<bool, String> {
            let mut comp_sum = 0u64;
            let mut components_attain = true;
            for (vi, comp) in comps.iter().enumerate() {
                let exps: Vec<Coeff> = comp
                    .sources
                    .iter()
                    .map(|(e, open, second)| {
                        if *open {
                            marked[e]
                        } else {
                            let c = node_exps[e];
                            if *second {
                                (n - c) % n
                            } else {
                                c
                            }
                        }
                    })
                    .collect();
                let gv = match gamma_cache.get(&(vi, exps.clone())) {
                    Some(&gv) => gv,
                    None => {
                        let cover = RamifiedP1Cover::new(
                            ctx,
                            comp.field.clone(),
                            comp.points.clone(),
                            exps.clone(),
                        )
                        .map_err(|e| e.to_string())?;
                        let gv = p1cover::gamma(&cover).map_err(|e| e.to_string())?;
                        gamma_cache.insert((vi, exps.clone()), gv);
                        gv
                    }
                };
                let local: Coeff = exps.iter().sum();
                let attain_target =
                    if local == 0 { 0 } else { (local / n - 1) as u64 };
                if gv != attain_target {
                    components_attain = false;
                }
                comp_sum += gv;
            }
            let deg: Coeff = marked.values().sum();
            let target = if deg == 0 {
                g_x.saturating_sub(1)
            } else {
                g_x + (deg / n) as u64 - 1
            };
            let exps_trivial =
                marked.values().all(|&c| c == 0) && node_exps.values().all(|&c| c == 0);
            let (vstab, estab) = stabilizer_profile(model, &ctx, marked, node_exps);
            let entry = cache.entry(&vstab, &estab).map_err(|e| e.to_string())?;
            // the check depends only on the term value, so the distinct
            // values stand in for the full voltage sweep
            let (terms, weight) = if exps_trivial {
                (&entry.distinct_nz, entry.count_nz)
            } else {
                (&entry.distinct_all, entry.count_all)
            };
            for &term in terms {
                let total = comp_sum + term;
                if total > target {
                    return Err(format!(
                        "bound violated: {total} > {target} at {marked:?} {node_exps:?}"
                    ));
                }
                if (total == target) != components_attain {
                    return Err(format!(
                        "equivalence failed at {marked:?} {node_exps:?}: \
                         total {total}, target {target}, components attain {components_attain}"
                    ));
                }
            }
            checked += weight;
            Ok(true)
        };
        match run() {
            Ok(cont) => cont,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    if let Err(e) = sweep {
        return Err(e.to_string());
    }
    if let Some(f) = failure {
        return Err(f);
    }
    // deterministic double-oracle subsample, re-run after the sweep so the
    // profile cache is fully populated: every profile gets one spot check
    for ((vstab, estab), entry) in cache.entries_snapshot() {
        let (volt, term, _) = entry.terms[entry.terms.len() / 2].clone();
        let voltages: BTreeMap<EdgeId, u64> = cache
            .cotree()
            .iter()
            .cloned()
            .zip(volt.iter().copied())
            .collect();
        let vstab_map: BTreeMap<VertexId, u64> =
            verts.iter().cloned().zip(vstab.iter().copied()).collect();
        let estab_map: BTreeMap<EdgeId, u64> = model
            .graph
            .closed_edges()
            .map(|(e, _)| e.clone())
            .zip(estab.iter().copied())
            .collect();
        let spec = CoverSpec::new(model.graph.clone(), n as u64, vstab_map, estab_map, voltages)
            .map_err(|e| e.to_string())?;
        let dims = eigenspace_dims(&build_cover(&spec), p).map_err(|e| e.to_string())?;
        if dims[1] != term {
            return Err("double-oracle spot check failed on a profile".into());
        }
        sampled += 1;
    }
    Ok((checked, sampled))
}

/// The pinned witness instances: small types realized as totally
/// degenerate curves on which the search must attain the maximum for some
/// exponent `t` within range.
pub fn witness_models(p: u64) -> Vec<(String, u64, u64, CurveModel)> {
    fn model(
        vs: &[(&str, u64)],
        closed: &[(&str, &str, &str)],
        open: &[(&str, &str)],
        p: u64,
    ) -> CurveModel {
        let g = crate::semigraph::SemiGraph::new(
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
    vec![
        (
            "(0,3) one component".into(),
            0,
            3,
            model(&[("v", 0)], &[], &[("x", "v"), ("y", "v"), ("z", "v")], p),
        ),
        (
            "(0,4) two components".into(),
            0,
            4,
            model(
                &[("v1", 0), ("v2", 0)],
                &[("a", "v1", "v2")],
                &[("x1", "v1"), ("x2", "v1"), ("x3", "v2"), ("x4", "v2")],
                p,
            ),
        ),
        (
            "(1,1) loop model".into(),
            1,
            1,
            model(&[("v", 0)], &[("c", "v", "v")], &[("x", "v")], p),
        ),
        (
            "(1,2) double edge".into(),
            1,
            2,
            model(
                &[("v1", 0), ("v2", 0)],
                &[("e1", "v1", "v2"), ("e2", "v1", "v2")],
                &[("m1", "v1"), ("m2", "v2")],
                p,
            ),
        ),
        (
            "(1,0) loop model, semistable".into(),
            1,
            0,
            model(&[("v", 0)], &[("c", "v", "v")], &[], p),
        ),
        (
            "(2,0) theta model".into(),
            2,
            0,
            model(
                &[("v1", 0), ("v2", 0)],
                &[("e1", "v1", "v2"), ("e2", "v1", "v2"), ("e3", "v1", "v2")],
                &[],
                p,
            ),
        ),
    ]
}

/// Search suite: each witness instance attains its maximum for some
/// `t <= t_max`, and the attained value matches the type formula.
pub fn suite_witnesses(t_max: u32, budget: u64) -> Report {
    let p = 2u64;
    let mut report = Report::new("verify-suite witnesses")
        .with_inputs(serde_json::json!({ "p": p, "t_max": t_max, "budget": budget }));
    let models = witness_models(p);
    let outcomes: Vec<(String, u64, u64, Option<u32>, u64)> = models
        .par_iter()
        .map(|(name, g, n, model)| {
            let mut found: Option<u32> = None;
            let mut best = 0u64;
            for t in 2..=t_max {
                let ctx = DigitContext::new(p, t).expect("valid");
                let out = search_max(model, ctx, budget).expect("searchable");
                best = best.max(out.best);
                if out.attained {
                    found = Some(t);
                    break;
                }
            }
            (name.clone(), *g, *n, found, best)
        })
        .collect();
    let mut all_found = true;
    let mut formula_ok = true;
    let mut lines = Vec::new();
    for (name, g, n, found, best) in &outcomes {
        let target = if *n == 0 { g - 1 } else { g + n - 2 };
        let formula = match anabelian::invariants_of(*g, *n) {
            Ok(i) => i.gamma_max,
            // the semistable loop models fall outside the stable types;
            // their target comes from the same display directly
            Err(_) => target,
        };
        if found.is_none() {
            all_found = false;
        }
        if *best != formula || target != formula {
            formula_ok = false;
        }
        lines.push(format!(
            "{name}: target {target}, attained at t = {found:?}, best {best}"
        ));
    }
    report = report.with_results(serde_json::json!({ "instances": lines }));
    report.push(Check::new(
        "max-gamma-witnesses",
        all_found,
        format!("{} instances", outcomes.len()),
    ));
    report.push(Check::new(
        "gamma-max-formula-consistency",
        formula_ok,
        "search maxima match the type formula",
    ));
    report
}

/// Divisor-family suite: the two-component worked configuration plus
/// seeded random quasi-tree curves all pass the structural checks.
pub fn suite_divisor_families(seed: u64, random_count: usize) -> Report {
    let mut report = Report::new("verify-suite divisor-families")
        .with_inputs(serde_json::json!({ "seed": seed, "random_count": random_count }));
    let mut failures: Vec<String> = Vec::new();
    let mut built = 0u64;

    // the worked two-component configuration
    {
        let g = crate::semigraph::SemiGraph::new(
            ["v1", "v2"].iter().map(|v| VertexId(v.to_string())),
            [("a", "v1", "v2")].iter().map(|(e, a, b)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(b.to_string()))
            }),
            [("x11", "v1"), ("x12", "v1"), ("x21", "v2")]
                .iter()
                .map(|(e, v)| (EdgeId(e.to_string()), VertexId(v.to_string()))),
        )
        .unwrap();
        // the one-mark component needs positive genus for stability
        let model = CurveModel::new(
            g,
            2,
            [("v1", 0u64), ("v2", 1u64)]
                .iter()
                .map(|(v, gg)| (VertexId(v.to_string()), *gg))
                .collect(),
            None,
        )
        .unwrap();
        let qt = minimal_quasi_tree(&model, None).expect("quasi-tree");
        match build_main_family(&model, &qt, 3) {
            Ok(fam) => {
                built += 1;
                let checks = check_main_family(&model, &qt, &fam);
                if !checks.all {
                    failures.push(format!("worked configuration: {checks:?}"));
                }
            }
            Err(e) => failures.push(format!("worked configuration: {e}")),
        }
        // three-point family on the same configuration
        let n1: Coeff = 3; // p = 2, per-block t = 2
        let mk = |a: Coeff, b: Coeff, c: Coeff| DivisorBlock {
            p: 2,
            t: 2,
            coeffs: BTreeMap::from([
                (EdgeId("x11".into()), a),
                (EdgeId("x12".into()), b),
                (EdgeId("x21".into()), c),
            ]),
        };
        match build_three_point_family(&model, &[mk(n1, 2, 1), mk(2, n1, 1), mk(1, 2, n1)]) {
            Ok(fam) => {
                built += 1;
                let checks = check_three_point_family(&model, &fam);
                if !checks.all {
                    failures.push(format!("three-point worked configuration: {checks:?}"));
                }
            }
            Err(e) => failures.push(format!("three-point worked configuration: {e}")),
        }
    }

    // random curves
    let mut rng = gen::rng(seed);
    let mut made = 0usize;
    while made < random_count {
        let p = if made.is_multiple_of(2) { 2 } else { 3 };
        let model = gen::random_stable_curve(&mut rng, p, 3, false, 2);
        if model.total_genus() > 2 || model.n_marked() < 2 {
            continue;
        }
        let qt = match minimal_quasi_tree(&model, None) {
            Ok(qt) if !qt.gamma.is_empty() => qt,
            _ => continue,
        };
        made += 1;
        let t0 = (1..=12u32)
            .find(|&t| {
                let n0 = (p as Coeff).pow(t) - 1;
                let edges =
                    (model.graph.closed_count() + model.graph.open_count()) as Coeff;
                n0 > (assembler::c_constant(model.total_genus()) + 1).max(edges)
            })
            .expect("threshold reachable");
        match build_main_family(&model, &qt, t0) {
            Ok(fam) => {
                built += 1;
                let checks = check_main_family(&model, &qt, &fam);
                if !checks.all {
                    failures.push(format!("random curve {made}: {checks:?}"));
                }
            }
            Err(e) => failures.push(format!("random curve {made}: {e}")),
        }
    }
    report = report.with_results(serde_json::json!({ "families_built": built }));
    report.push(Check::new(
        "divisor-family-structure",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{built} families pass kernel/degree/shift/node/restriction checks")
        } else {
            failures[0].clone()
        },
    ));
    report
}

/// Anabelian suite: the type recovery round-trip over all small stable
/// types, plus the formula spot values.
pub fn suite_anabelian(max_gn: u64) -> Report {
    let mut report =
        Report::new("verify-suite anabelian").with_inputs(serde_json::json!({ "max": max_gn }));
    let mut count = 0u64;
    let mut ok = true;
    for g in 0..=max_gn {
        for n in 0..=max_gn {
            if !anabelian::is_stable_type(g, n) {
                continue;
            }
            let i = anabelian::invariants_of(g, n).expect("stable");
            count += 1;
            if anabelian::recover_type(i.b1, i.b2, i.gamma_max) != Ok((g, n)) {
                ok = false;
            }
        }
    }
    report = report.with_results(serde_json::json!({ "types": count }));
    report.push(Check::new(
        "type-recovery-roundtrip",
        ok,
        format!("{count} stable types round-trip"),
    ));
    let spot = anabelian::invariants_of(2, 3).map(|i| (i.b1, i.b2, i.gamma_max));
    report.push(Check::new(
        "invariant-spot-values",
        spot == Ok((6, 0, 3)) && assembler::c_constant(4) == 648,
        "closed-form spot values",
    ));
    report
}

/// Quasi-tree suite: the worked three-component example reproduces its
/// expected tree and image graph; random graphs keep the structural
/// invariants and idempotence.
pub fn suite_quasitree(seed: u64, random_count: usize) -> Report {
    let mut report = Report::new("verify-suite quasitree")
        .with_inputs(serde_json::json!({ "seed": seed, "random_count": random_count }));
    let mut failures = Vec::new();

    // golden instance
    {
        let g = crate::semigraph::SemiGraph::new(
            ["v1", "v2", "v3"].iter().map(|v| VertexId(v.to_string())),
            [
                ("a1", "v1", "v2"),
                ("a2", "v1", "v2"),
                ("a3", "v2", "v3"),
                ("c", "v1", "v1"),
            ]
            .iter()
            .map(|(e, a, b)| {
                (EdgeId(e.to_string()), VertexId(a.to_string()), VertexId(b.to_string()))
            }),
            [("b1", "v1"), ("b2", "v2")]
                .iter()
                .map(|(e, v)| (EdgeId(e.to_string()), VertexId(v.to_string()))),
        )
        .unwrap();
        let model = CurveModel::new(
            g,
            2,
            [("v1", 0u64), ("v2", 0), ("v3", 1)]
                .iter()
                .map(|(v, gg)| (VertexId(v.to_string()), *gg))
                .collect(),
            None,
        )
        .unwrap();
        let hint: std::collections::BTreeSet<EdgeId> =
            std::iter::once(EdgeId("a1".into())).collect();
        let r = minimal_quasi_tree(&model, Some(&hint)).expect("constructible");
        let gamma_ok = r.gamma.vertex_count() == 2
            && r.gamma.closed_count() == 2
            && r.gamma.open_count() == 5
            && r.gamma.loop_edges().len() == 1
            && r.gamma.open_vertex(&EdgeId("a3".into())).map(|v| v.0.as_str()) == Some("v2");
        let image_ok = r.image.vertex_count() == 2
            && r.image.closed_count() == 3
            && r.image.open_count() == 3
            && r.image.ends(&EdgeId("a1".into())).is_some();
        if !gamma_ok || !image_ok {
            failures.push("golden instance does not match the expected figures".to_string());
        }
    }

    let mut rng = gen::rng(seed);
    let mut made = 0usize;
    while made < random_count {
        let model = gen::random_stable_curve(&mut rng, 2, 5, false, 0);
        made += 1;
        let r = match minimal_quasi_tree(&model, None) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("random {made}: {e}"));
                continue;
            }
        };
        if model.n_marked() == 0 {
            if !r.gamma.is_empty() {
                failures.push(format!("random {made}: nonempty result without marks"));
            }
            continue;
        }
        if !r.gamma.loopless_is_tree() {
            failures.push(format!("random {made}: not a tree with loops"));
        }
        for (e, _) in model.graph.open_edges() {
            if r.gamma.open_vertex(e).is_none() {
                failures.push(format!("random {made}: lost mark {e}"));
            }
        }
        for v in r.gamma.vertices() {
            if !model.graph.has_vertex(v) {
                failures.push(format!("random {made}: foreign vertex"));
            }
        }
        // idempotence
        let again = quasi_tree_model(&model, &r)
            .and_then(|m| {
                minimal_quasi_tree(&m, Some(&std::collections::BTreeSet::new()))
                    .map_err(|_| crate::semigraph::GraphError::Empty)
            })
            .map(|r2| r2.gamma == r.gamma);
        if again != Ok(true) {
            failures.push(format!("random {made}: not idempotent"));
        }
    }
    report = report.with_results(serde_json::json!({ "random_instances": random_count }));
    report.push(Check::new(
        "quasi-tree-invariants",
        failures.is_empty(),
        if failures.is_empty() {
            format!("golden figures + {random_count} random graphs")
        } else {
            failures[0].clone()
        },
    ));
    report
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
