mod common;

use std::path::Path;

use common::real;
use tempfile::TempDir;
use wpda::cli::main_with;
use wpda::oracle;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wpda").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_p1(dir: &Path) -> String {
    let path = dir.join("p1.json");
    oracle::p1(real()).save(&path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_and_classify() {
    let dir = TempDir::new().unwrap();
    let p = write_p1(dir.path());
    let (code, out, _) = run(&["validate", "--in", &p]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1 states, 2 stack symbols, 3 transitions"), "{out}");
    let (code, out, _) = run(&["classify", "--in", &p]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["is_normal_form_bu"], true);
}

#[test]
fn duplicate_transitions_warn() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("dup.json");
    let mut v: serde_json::Value = serde_json::from_str(&oracle::p1(real()).to_json()).unwrap();
    let first = v["transitions"][0].clone();
    v["transitions"].as_array_mut().unwrap().push(first);
    std::fs::write(&path, v.to_string()).unwrap();
    let (code, _, err) = run(&["validate", "--in", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(err.matches("warning:").count(), 1, "{err}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = run(&["validate", "--in", "/nonexistent/machine.json"]);
    assert_eq!(code, 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (code, _, err) = run(&["validate", "--in", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    let p = write_p1(dir.path());
    let (code, _, _) = run(&["stringsum", "--in", &p, "--algo", "td", "--string", "ab"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["runsum", "--in", &p, "--semiring", "counting"]);
    assert_eq!(code, 2, "{err}");
    let counting = dir.path().join("counting.json");
    oracle::p1(wpda::Semiring::new(wpda::SemiringKind::Counting)).save(&counting).unwrap();
    let (code, _, err) = run(&["runsum", "--in", counting.to_str().unwrap(), "--max-iters", "20"]);
    assert!(code == 3 || code == 4, "{code} {err}");
}

#[test]
fn stringsum_with_counters_and_wfsa() {
    let dir = TempDir::new().unwrap();
    let p = write_p1(dir.path());
    let wfsa = dir.path().join("wfsa.json");
    let (code, out, err) = run(&[
        "stringsum",
        "--in",
        &p,
        "--string",
        "aabb",
        "--counters",
        "--emit-wfsa",
        "2",
        wfsa.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "0.0625");
    assert_eq!(lines[1], "algo,n,Q,Gamma,oplus,otimes");
    assert!(lines[2].starts_with("bu-fast,4,1,2,"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(wfsa).unwrap()).unwrap();
    assert_eq!(v["prefix_len"], 2);
}

#[test]
fn runsum_and_oracle() {
    let dir = TempDir::new().unwrap();
    let p = write_p1(dir.path());
    let (code, out, _) = run(&["runsum", "--in", &p]);
    assert_eq!(code, 0);
    let z: f64 = out.trim().parse().unwrap();
    assert!((z - 1.0 / 3.0).abs() < 1e-10);
    let (code, out, _) = run(&["oracle", "--in", &p, "--string", "aabb"]);
    assert_eq!(code, 0);
    assert_eq!(out, "runs: 1\nweight: 0.0625\ncomplete: true\n");
}

#[test]
fn transform_writes_normal_form() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("cycle.json");
    oracle::epsilon_cycle(real()).save(&p).unwrap();
    let out_path = dir.path().join("nf.json");
    let (code, out, err) = run(&[
        "transform",
        "--in",
        p.to_str().unwrap(),
        "--pass",
        "normal-form",
        "--mode",
        "top-down",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("normal-form-td"), "{out}");
    let (q, _) = wpda::Wpda::load(&out_path, None).unwrap();
    assert!(q.classify().is_normal_form_td);
}

#[test]
fn pipeline_certificate() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("cycle.json");
    oracle::epsilon_cycle(real()).save(&p).unwrap();
    let out_path = dir.path().join("out.json");
    let args = ["pipeline", "--in", p.to_str().unwrap(), "--out", out_path.to_str().unwrap()];
    let (code, out, err) =
        run(&[&args[..], &["--passes", "binarize,remove-nullary,remove-unary,trim"]].concat());
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("certificate: pass"));
    assert!(err.is_empty(), "{err}");

    let (_, _, err) = run(&[&args[..], &["--passes", "remove-nullary,binarize"]].concat());
    assert!(err.contains("warning: nullary removal runs before binarization"), "{err}");
}

#[test]
fn bench_is_deterministic() {
    let args = ["bench", "--family", "bu", "--sizes", "2,3", "--length", "6"];
    let (code, a, _) = run(&args);
    assert_eq!(code, 0);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 3);

    let (code, out, _) = run(&["bench", "--sizes", ""]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn unknown_names_are_parse_errors() {
    let dir = TempDir::new().unwrap();
    let p = write_p1(dir.path());
    assert_eq!(run(&["stringsum", "--in", &p, "--algo", "cyk"]).0, 2);
    assert_eq!(run(&["validate", "--in", &p, "--semiring", "fuzzy"]).0, 2);
    assert_eq!(run(&["stringsum", "--in", &p, "--string", "abc"]).0, 2);
    assert_eq!(run(&["bench", "--family", "other"]).0, 2);
}
