use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_monocircuit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok_json(args: &[&str], stdin: &str) -> Value {
    let out = run(args, stdin);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(args: &[&str], stdin: &str) -> String {
    String::from_utf8(run(args, stdin).stdout).unwrap()
}

const X_PLUS_XY_PLUS_1: &str = r#"{
  "true_vars": ["x", "y"], "aux_vars": [], "monotone": true,
  "gates": [
    {"id": 0, "kind": "var", "name": "x"},
    {"id": 1, "kind": "var", "name": "y"},
    {"id": 2, "kind": "const", "value": "1"},
    {"id": 3, "kind": "mul", "l": 0, "r": 1},
    {"id": 4, "kind": "add", "l": 0, "r": 3},
    {"id": 5, "kind": "add", "l": 4, "r": 2}
  ],
  "outputs": [5]
}"#;

#[test]
fn perm_gen_then_expand() {
    let circuit = stdout(&["perm-gen", "--n", "3"], "");
    let p = ok_json(&["expand"], &circuit);
    assert_eq!(p["terms"].as_array().unwrap().len(), 6);
}

#[test]
fn hom_then_expand() {
    let h = stdout(&["hom", "--k", "2"], X_PLUS_XY_PLUS_1);
    let p = ok_json(&["expand"], &h);
    let terms = p["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["exps"], serde_json::json!({"x": 1, "y": 1}));
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let a = stdout(&["perm-gen", "--n", "2"], "");
    let b = stdout(&["perm-gen", "--n", "2"], "");
    assert_eq!(a, b);
    let lowered = stdout(&["lower"], &a);
    assert_eq!(stdout(&["expand"], &lowered), stdout(&["expand"], &a));
    let p = stdout(&["expand"], &a);
    let v: Value = serde_json::from_str(&p).unwrap();
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", p);
}

#[test]
fn exit_codes() {
    let parse = run(&["expand"], "{ not json");
    assert_eq!(parse.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 1 column"));

    let invalid = r#"{"true_vars": ["x"], "aux_vars": [], "monotone": true, "gates": [{"id": 0, "kind": "var", "name": "q"}], "outputs": [0]}"#;
    let v = run(&["validate"], invalid);
    assert_eq!(v.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(report["valid"], false);

    let overflow = run(&["--max-terms", "3", "expand"], &stdout(&["perm-gen", "--n", "3"], ""));
    assert_eq!(overflow.status.code(), Some(3));

    assert_eq!(run(&["expand", "--no-such-flag"], "").status.code(), Some(1));
}

#[test]
fn validate_accepts_good_input() {
    let r = ok_json(&["validate"], X_PLUS_XY_PLUS_1);
    assert_eq!(r["valid"], true);
}

#[test]
fn eval_at_a_point() {
    let r = ok_json(&["eval", "--at", "x=2", "--at", "y=1/2"], X_PLUS_XY_PLUS_1);
    assert_eq!(r["values"][0], "4/1");
}

#[test]
fn abp_commands() {
    let abp = r#"{"r": 1, "s": "0", "t": "1", "ell": 2,
      "B": {"true_vars": ["u1", "v1", "x"], "aux_vars": [], "monotone": true,
            "gates": [{"id": 0, "kind": "var", "name": "x"}], "outputs": [0]}}"#;
    let p = ok_json(&["abp-expand"], abp);
    assert_eq!(p["terms"].as_array().unwrap().len(), 2);
    let es = ok_json(&["abp-expsum", "--check"], abp);
    assert_eq!(es["enumeration_matches"], true);
    let check = ok_json(&["abp-check"], abp);
    assert_eq!(check["length_bound"]["status"], "OK");
    assert_eq!(ok_json(&["validate"], abp)["valid"], true);
}

#[test]
fn quantified_commands() {
    let q = r#"{"true_vars": ["x"], "aux_vars": ["z", "y"], "monotone": true,
      "gates": [{"id": 0, "kind": "var", "name": "y"}, {"id": 1, "kind": "var", "name": "x"}, {"id": 2, "kind": "mul", "l": 0, "r": 1}],
      "outputs": [2], "prefix": [["prod", "z"], ["sum", "y"]]}"#;
    let r = ok_json(&["expsum", "--max-degree", "8"], q);
    assert_eq!(r["report"]["productions"], 1);
    let t = ok_json(&["expsum-trivial"], q);
    assert_eq!(t["summed_vars"].as_array().unwrap().len(), 2);
    let p = ok_json(&["expsum-pruned"], q);
    assert!(p["A_table"].is_object());
    // f = x² against g(x, 1) = x: the supports differ, but {x²} is decomposable
    let s = ok_json(&["support-check"], q);
    assert_eq!(s["supports_equal"], false);
    assert_eq!(s["f_support_decomposable"], true);
    assert_eq!(s["consistent"], true);
}

#[test]
fn shadow_and_transparent() {
    let p = r#"{"laurent": false, "terms": [
      {"coeff": "1", "exps": {"x": 1, "y": 1}}, {"coeff": "1", "exps": {"x": 1}}, {"coeff": "1", "exps": {"y": 1}}]}"#;
    let dir = std::env::temp_dir().join(format!("monocircuit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("shadow.svg");
    let r = ok_json(&["shadow", "--k", "1", "--svg", svg.to_str().unwrap()], p);
    assert_eq!(r["verdict"], "TRANSPARENT_WITNESSED");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let w = ok_json(&["transparent", "--witness", "1,0;0,1"], p);
    assert_eq!(w["vertex_count"], 3);
    let sampled_a = stdout(&["--seed", "3", "shadow", "--samples", "20"], p);
    let sampled_b = stdout(&["--seed", "3", "shadow", "--samples", "20"], p);
    assert_eq!(sampled_a, sampled_b);
    let dep = r#"{"laurent": false, "terms": [
      {"coeff": "1", "exps": {"x": 2}}, {"coeff": "1", "exps": {"x": 1, "y": 1}}, {"coeff": "1", "exps": {"y": 2}}]}"#;
    let d = ok_json(&["transparent"], dep);
    assert_eq!(d["verdict"], "NOT_TRANSPARENT_EXHAUSTIVE");
    assert_eq!(d["certificate"]["point"], serde_json::json!([1, 1]));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn selftest_single_criterion() {
    let r = ok_json(&["selftest", "--json", "--only", "10"], "");
    assert_eq!(r["passed"], true);
}
