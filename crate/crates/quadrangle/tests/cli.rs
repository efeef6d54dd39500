use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_quadrangle")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eval_uniform_quantile() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.csv", "value\n1\n2\n3\n4\n5\n");
    let (code, out) = run(&["--format", "json", "eval", "--family", "quantile", "--alpha", "0.6", "--input", &input]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["risk"], 4.5);
    assert_eq!(v["deviation"], 1.5);
    assert_eq!(v["statistic"], serde_json::json!([3.0, 4.0]));
}

#[test]
fn spec_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.csv", "value,prob\n0,0.5\n1,0.5\n");
    let spec = write(dir.path(), "s.json", r#"{"family": "expectile_mse", "params": {"q": 0.9}}"#);
    let (code, out) = run(&["--format", "json", "statistic", "--spec", &spec, "--q", "0.75", "--input", &input]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["statistic"][0], 0.75);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "x.csv", "value,prob\n1,0.5\n2,0.2\n");
    assert_eq!(run(&["eval", "--family", "quantile", "--alpha", "0.5", "--input", &bad]).0, 1);
    let good = write(dir.path(), "y.csv", "value\n1\n2\n");
    assert_eq!(run(&["eval", "--family", "quantile", "--input", &good]).0, 1);
    assert_eq!(run(&["eval", "--family", "quantile", "--alpha", "1.5", "--input", &good]).0, 1);
}

#[test]
fn output_file_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, _) = run(&["--format", "json", "--output", out.to_str().unwrap(), "check", "--samples", "10"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn regress_reports_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n0,1.0\n1,2.5\n2,2.9\n3,4.2\n4,5.1\n5,5.8\n");
    let (code, out) =
        run(&["--format", "json", "regress", "--family", "quantile", "--alpha", "0.5", "--input", &data]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("gap"));
}
