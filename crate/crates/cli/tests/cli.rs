use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn blowup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowup")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn maxord_reports_order_and_locus() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "g.json", r#"{"vars": ["X", "Y", "Z"], "gens": ["Z^3+X*Y^2*Z+X^5"]}"#);
    let o = blowup(&["maxord", s(&spec)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("max order: 3"), "{}", out);
    assert!(out.contains("Sing(J, 3) = <Z, Y^2, X*Y, X^3>"), "{}", out);
    assert!(out.contains("dimension: 0"), "{}", out);
}

#[test]
fn principalize_json_has_stage_two_exponents() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "c.json", r#"{"vars": ["x", "y"], "gens": ["x^2-y^5"]}"#);
    let o = blowup(&["--format", "json", "principalize", s(&spec)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["status"], "resolved");
    let hit = v["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n["stage"] == 2 && n["total"]["1"] == 2 && n["total"]["2"] == 4);
    assert!(hit);
}

#[test]
fn surface_desing_reports_first_center_and_partial_trace() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"vars": ["x", "y", "z"], "gens": ["z^2+x^2+y^3"]}"#);
    let o = blowup(&["desing", s(&spec)]);
    // the run stops at stage 2 on a center that is not a coordinate
    // subspace; the partial trace still shows the first steps
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("chart 0: <y^3 + x^2 + z^2> center V(x, y, z)"), "{}", out);
    assert!(out.contains("on V(z): <y^3 + x^2> with bound 2"), "{}", out);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage 2"));
}

#[test]
fn verify_accepts_and_rejects() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "c.json", r#"{"vars": ["x", "y"], "gens": ["x^2-y^3"]}"#);
    let trace = dir.path().join("t.json");
    let o = blowup(&["--format", "json", "--out", s(&trace), "principalize", s(&spec)]);
    assert!(o.status.success());
    let o = blowup(&["verify", s(&trace)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("ok:"));

    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    let node = v["nodes"].as_array_mut().unwrap().iter_mut().find(|n| n["stage"] == 1).unwrap();
    let chart = node["chart"].as_u64().unwrap();
    let a = node["a"].as_object_mut().unwrap();
    let key = a.keys().next().unwrap().clone();
    a[&key] = serde_json::json!(7);
    let bad = write(dir.path(), "bad.json", &serde_json::to_string_pretty(&v).unwrap());
    let o = blowup(&["verify", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains(&format!("chart {} at stage 1", chart)), "{}", err);
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let empty = write(dir.path(), "empty.json", "");
    assert_eq!(blowup(&["verify", s(&empty)]).status.code(), Some(1));
    let unknown = write(dir.path(), "u.json", r#"{"vars": ["x"], "gens": ["x"], "colour": 1}"#);
    assert_eq!(blowup(&["principalize", s(&unknown)]).status.code(), Some(1));
    let badvar = write(dir.path(), "v.json", r#"{"vars": ["x"], "gens": ["y^2"]}"#);
    assert_eq!(blowup(&["principalize", s(&badvar)]).status.code(), Some(1));
    let zero = write(dir.path(), "z.json", r#"{"vars": ["x"], "gens": ["0"]}"#);
    assert_eq!(blowup(&["principalize", s(&zero)]).status.code(), Some(1));
    let ok = write(dir.path(), "ok.json", r#"{"vars": ["x"], "gens": ["x^2"]}"#);
    assert_eq!(blowup(&["--format", "dot", "maxord", s(&ok)]).status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "m.json", r#"{"vars": ["x1", "x2", "x3"], "gens": ["x1^6*x2^7*x3^4"], "bound": 5, "divisors": ["x1", "x2", "x3"]}"#);
    for fmt in ["text", "json", "dot"] {
        let a = blowup(&["--format", fmt, "resolve", s(&spec)]);
        let b = blowup(&["--format", fmt, "resolve", s(&spec)]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{}", fmt);
    }
}

#[test]
fn json_round_trips_through_verify() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "c.json", r#"{"vars": ["x", "y"], "gens": ["x^2*y^3"], "divisors": ["x", "y"]}"#);
    let o = blowup(&["--format", "json", "resolve", "--bound", "1", s(&spec)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()), text);
    let t = write(dir.path(), "t.json", &text);
    assert!(blowup(&["verify", s(&t)]).status.success());
}
