use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn affsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affsphere")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn solve_writes_field_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "differential": {"k": 3, "terms": [[0, 1.0, 0.0]]}}"#);
    let out = dir.path().to_str().unwrap();
    let res = affsphere(&["solve", "--config", &cfg, "--out", out, "--resolution", "33", "--threads", "2"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let mut lines = text.split("\r\n");
    assert_eq!(lines.next(), Some("x,y,u,u_flat,residual"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row.len(), 5);
}

#[test]
fn output_is_independent_of_thread_count() {
    let config = r#"{"schema_version": 1, "differential": {"k": 3, "terms": [[1, 1.0, 0.0]]},
        "domain": {"kind": "radial_disk", "radius": 20}, "resolution": 10001, "rays": {"edge_offsets": [0.5]}}"#;
    let mut tables = Vec::new();
    for threads in ["1", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), config);
        let res = affsphere(&["polygon", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
        assert!(fs::read_to_string(dir.path().join("polygon.svg")).unwrap().contains(r#"version="1.1""#));
        assert!(String::from_utf8_lossy(&res.stdout).contains("vertex cross-ratios"));
        tables.push([fs::read(dir.path().join("vertices.csv")).unwrap(), fs::read(dir.path().join("edges.csv")).unwrap()]);
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn classify_end_reports_half_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema_version": 1, "differential": {"k": 3, "terms": [[-3, 2.0, 0.0], [0, 1.0, 0.0]], "chart": "punctured_disk"}}"#,
    );
    let res = affsphere(&["classify-end", "--config", &cfg]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("half-cylinder"));
}

#[test]
fn malformed_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"schema_version\": 1,\n  \"resolution\": }");
    let res = affsphere(&["solve", "--config", &cfg]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 2"));
}

#[test]
fn unknown_schema_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 99}"#);
    assert_eq!(code(&affsphere(&["solve", "--config", &cfg])), 2);
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(code(&affsphere(&["solve", "--threads", "0"])), 2);
    assert_eq!(code(&affsphere(&["solve", "--tol", "-1"])), 2);
    assert_eq!(code(&affsphere(&["frobnicate"])), 2);
}

#[test]
fn exhausted_newton_budget_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema_version": 1, "differential": {"k": 3, "terms": [[1, 1.0, 0.0]]}, "resolution": 33,
            "solver": {"tol": 1e-14, "cg_tol": 1e-16, "max_newton": 1}}"#,
    );
    let res = affsphere(&["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&res), 1, "{}", String::from_utf8_lossy(&res.stdout));
}
