//! End-to-end runs of the binary against the fixture files: exit codes,
//! check outcomes, and byte-stable JSON reports.

use std::process::{Command, Output};

fn ghw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghw"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data"))
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn invariants_of_the_two_loop_curve() {
    let out = ghw(&["invariants", "--curve", "curve_2loops.json", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["genus"], 2);
    assert_eq!(v["results"]["betti_number"], 2);
    assert_eq!(v["results"]["marked_points"], 1);
    assert_eq!(v["results"]["loops"][0], "e3");
}

#[test]
fn malformed_curve_is_an_input_error() {
    let dir = tempdir();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"p": 3, "vertices": [], "unknown": 1}"#).unwrap();
    let out = ghw(&["validate", "--curve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quasi_tree_with_hint_matches_expectations() {
    let out = ghw(&[
        "quasi-tree",
        "--curve",
        "curve_quasi.json",
        "--hint-e",
        "a1",
        "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let gamma = &v["results"]["result"]["gamma"];
    assert_eq!(gamma["vertices"].as_array().unwrap().len(), 2);
    assert!(v["results"]["dot_image"].as_str().unwrap().contains("a1"));
    // invalid hint: cutting both parallel edges disconnects
    let out = ghw(&["quasi-tree", "--curve", "curve_quasi.json", "--hint-e", "a1,a2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cover_gamma_on_topological_double_cover() {
    let out = ghw(&[
        "cover", "gamma", "--curve", "curve_2loops.json", "--cover", "cover_top.json", "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["dims"], serde_json::json!([2, 1]));
    assert_eq!(v["results"]["connected"], true);
}

#[test]
fn divisor_check_reports_balance() {
    let out = ghw(&["divisor", "check", "--divisor", "divisor_753.json", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["s"], "2");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn gamma_of_the_four_point_component() {
    // lam = g (a generator of GF(9)): ordinary, so gamma = 1
    let out = ghw(&["gamma", "--component", "component_lambda.json", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["gamma"], 1);
    assert_eq!(v["results"]["theta_certificate"], true);
}

#[test]
fn assemble_the_glued_witness() {
    let out = ghw(&[
        "assemble",
        "--curve",
        "curve_glued.json",
        "--cover",
        "cover_glued.json",
        "--divisor",
        "divisor_glued.json",
        "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["total_gamma"], 2);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true), "{v}");
}

#[test]
fn search_attains_on_the_tripod_at_t3() {
    let out = ghw(&[
        "search-max", "--curve", "curve_tripod.json", "--p", "2", "--t", "3",
        "--budget", "10^6", "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["best"], 1);
    assert_eq!(v["results"]["attained"], true);
    // at t = 2 nothing attains and the exit code says so
    let out = ghw(&[
        "search-max", "--curve", "curve_tripod.json", "--p", "2", "--t", "2", "--budget", "1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn anabelian_formulas() {
    let out = ghw(&["anabelian", "--g", "2", "--n", "3", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["invariants"]["b1"], 6);
    assert_eq!(v["results"]["invariants"]["gamma_max"], 3);
    let out = ghw(&["anabelian", "--b1", "6", "--b2", "0", "--gamma-max", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["recovered_type"], serde_json::json!([2, 3]));
    let out = ghw(&["anabelian", "--c-constant", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["c_constant"], "648");
}

#[test]
fn reports_are_byte_stable() {
    let a = ghw(&["invariants", "--curve", "curve_2loops.json", "--json"]);
    let b = ghw(&["invariants", "--curve", "curve_2loops.json", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn small_verify_suites_run_from_the_cli() {
    for suite in ["shift-action", "lambda", "anabelian"] {
        let out = ghw(&["verify-suite", suite]);
        assert!(out.status.success(), "suite {suite}: {}", stdout(&out));
    }
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ghw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
