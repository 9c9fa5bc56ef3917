use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bisimso(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bisimso"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn run(args: &[&str], files: &[&str]) -> (i32, String, String) {
    let paths: Vec<String> = files.iter().map(|f| fixture(f).display().to_string()).collect();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(paths.iter().map(String::as_str));
    bisimso(&all)
}

fn json(args: &[&str], files: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let (code, out, err) = run(&all, files);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}")))
}

#[test]
fn analyze_self_loop() {
    let (code, out, _) = run(&["analyze"], &["self_loop.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("cb_rank: 0, shape: 1-lasso"), "{out}");
}

#[test]
fn analyze_double_self_loop() {
    let (code, out, _) = run(&["analyze"], &["double_loop.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("cb_rank: INFINITE"), "{out}");
    assert!(out.contains("s -a-> s") && out.contains("s -b-> s"), "{out}");
}

#[test]
fn analyze_dag() {
    let (_, out, _) = run(&["analyze"], &["dag.json"]);
    assert!(out.contains("shape: tree extension (no cycles)"), "{out}");
}

#[test]
fn analyze_reports_raw_and_quotient_rank() {
    let (_, v) = json(&["analyze"], &["two_cycle.json"]);
    assert_eq!(v["cb_rank"], "0");
    assert_eq!(v["quotient"]["states"], 1);
    assert_eq!(v["shape"], "1-lasso");
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"states\":[\"a\"],\"initial\":\"b\"}").unwrap();
    let (code, _, err) = bisimso(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("undeclared") || err.contains("initial"), "{err}");
    let (code, _, _) = bisimso(&["analyze", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn equiv_bisim() {
    let (code, out, _) = run(&["equiv"], &["self_loop.json", "two_cycle.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("relation: 2 pair(s)"), "{out}");
    let (code, out, _) = run(&["equiv"], &["self_loop.json", "double_loop.json"]);
    assert_eq!(code, 1);
    assert!(out.contains("not bisimilar"), "{out}");
}

#[test]
fn equiv_mso() {
    let (code, out, _) = run(&["equiv", "--mode", "mso", "--rank", "2"], &["dag.json", "dag.json"]);
    assert_eq!(code, 0);
    for k in 0..=2 {
        assert!(out.contains(&format!("rank {k}: equal")), "{out}");
    }
    // bisimilar but told apart by MSO with equality
    let (code, v) = json(&["equiv", "--mode", "mso"], &["self_loop.json", "two_cycle.json"]);
    assert_eq!(code, 1);
    assert_eq!(v["first_distinguishing_rank"], 0);
}

#[test]
fn equiv_mso_over_guard() {
    let (code, _, err) = run(&["equiv", "--mode", "mso", "--guard-states", "2"], &["dag.json", "dag.json"]);
    assert_eq!(code, 3);
    assert!(err.contains("guard"), "{err}");
}

#[test]
fn chain_identical() {
    let (code, out, _) = run(&["chain"], &["lasso_ab.json", "lasso_ab.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("chain: 1 system(s), verified"), "{out}");
}

#[test]
fn chain_tail_absorbs_loop() {
    let (code, v) = json(&["chain"], &["lasso_ab.json", "lasso_aab.json"]);
    assert_eq!(code, 0);
    let systems = v["chain"]["systems"].as_array().unwrap();
    assert_eq!(systems.len(), 6);
    assert_eq!(v["chain"]["links"].as_array().unwrap().len(), 5);
}

#[test]
fn chain_a_loop_vs_b_loop() {
    let (code, out, _) = run(&["chain"], &["self_loop.json", "b_loop.json"]);
    assert_eq!(code, 4);
    assert!(out.contains("A: strong type") && out.contains("B: strong type"), "{out}");
    assert!(out.contains("weak types differ"), "{out}");
    let (_, v) = json(&["chain"], &["self_loop.json", "b_loop.json"]);
    assert_ne!(v["a"]["weak"], v["b"]["weak"]);
}

#[test]
fn algebra_one_letter_rank_0() {
    let (code, out, _) = run(&["--rank", "0", "algebra"], &["one_letter.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("elements: 3\n"), "{out}");
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/algebra_one_letter_m0.txt")).unwrap();
    assert_eq!(out, golden);
}

#[test]
fn algebra_classes_match_chain_verdicts() {
    let (_, alg) = json(&["algebra"], &["one_letter.json"]);
    let sizes: Vec<u64> = alg["classes"].as_array().unwrap().iter().map(|c| c["size"].as_u64().unwrap()).collect();
    let (_, v) = json(&["chain"], &["self_loop.json", "two_cycle.json"]);
    let k = v["a"]["weak"].as_u64().unwrap() as usize;
    assert_eq!(v["a"]["class"].as_array().unwrap().len() as u64, sizes[k]);
    assert_eq!(v["a"]["weak"], v["b"]["weak"]);
}

#[test]
fn algebra_guard_exits_3() {
    let (code, _, err) = run(&["--rank", "1", "--guard-path-len", "1", "algebra"], &["ab_p.json"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn rank_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bisimso"))
        .args(["algebra", fixture("one_letter.json").to_str().unwrap()])
        .env_clear()
        .env("BISIMSO_RANK", "0")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("path algebra rank 0\n"));
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["--format", "json", "encode"], &["tree_extension.json"]);
    assert_eq!(code, 0);
    let enc = dir.path().join("enc.json");
    std::fs::write(&enc, &out).unwrap();
    let (code, decoded, err) = bisimso(&["decode", enc.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let dec = dir.path().join("dec.json");
    std::fs::write(&dec, decoded).unwrap();
    let orig = fixture("tree_extension.json");
    let (code, out, _) = bisimso(&["equiv", "--mode", "mso", orig.to_str().unwrap(), dec.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    // re-encoding gives the same skeleton and labels
    let (_, again, _) = bisimso(&["--format", "json", "encode", dec.to_str().unwrap()]);
    let a: Value = serde_json::from_str(&again).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&enc).unwrap()).unwrap();
    assert_eq!(a["skeleton"], b["skeleton"]);
    assert_eq!(a["labels"], b["labels"]);
}

#[test]
fn selftest_passes() {
    let (code, out, _) = bisimso(&["selftest", "--fraction", "0.01"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("suites passed"));
}
