use std::fs;
use std::process::{Command, Output};

const TWO_POINTS: &str = r#"{"in_points":["0","1"],"out_point":"inf"}"#;
const THREE_POINTS: &str = r#"{"in_points":["0","1","-1"],"out_point":"inf"}"#;

fn kn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kn")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Data rows of a CSV output, without comment lines and header.
fn rows(out: &Output) -> Vec<Vec<String>> {
    stdout(out)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn footer(out: &Output, tag: &str) -> String {
    stdout(out).lines().find(|l| l.starts_with(&format!("# {tag}"))).unwrap().to_string()
}

#[test]
fn classical_vector_field_basis_is_monomial() {
    let out = kn(&["basis", "--lambda", "-1", "--window", "-2:2"]);
    assert_eq!(code(&out), 0);
    let r = rows(&out);
    assert_eq!(r.len(), 5);
    let nums: Vec<_> = r.iter().map(|x| (x[3].as_str(), x[4].as_str())).collect();
    assert_eq!(nums, [("1", "z"), ("1", "1"), ("z", "1"), ("z^2", "1"), ("z^3", "1")]);
}

#[test]
fn two_point_function_basis() {
    let out = kn(&["--config", TWO_POINTS, "basis", "--lambda", "0", "--window", "0:0"]);
    assert_eq!(code(&out), 0);
    assert!(rows(&out).iter().any(|r| r[1] == "0" && r[2] == "1" && r[3] == "1 - z"));
}

#[test]
fn empty_window_gives_empty_array() {
    let out = kn(&["basis", "--lambda", "0", "--window", "2:1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "[]");
}

#[test]
fn config_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.json");
    fs::write(&path, TWO_POINTS).unwrap();
    let from_file = kn(&["--config", path.to_str().unwrap(), "basis", "--lambda", "-1/2", "--window", "-1:1"]);
    let inline = kn(&["--config", TWO_POINTS, "basis", "--lambda", "-1/2", "--window", "-1:1"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, inline.stdout);
}

#[test]
fn classical_bracket_table() {
    let out = kn(&["structconst", "--op", "bracket", "--lambda", "-1", "--nu", "-1", "--window", "-3:3"]);
    assert_eq!(code(&out), 0);
    let r = rows(&out);
    assert!(!r.is_empty());
    for row in r {
        let n: i64 = row[0].parse().unwrap();
        let m: i64 = row[2].parse().unwrap();
        assert_eq!(row[4], (n + m).to_string());
        assert_eq!(row[6], (m - n).to_string());
    }
    let f = footer(&out, "grading");
    assert!(f.contains("r_low=0 r_high=0") && f.contains("stable=true"), "{f}");
}

#[test]
fn classical_jordan_odd_table() {
    let out = kn(&["structconst", "--op", "jordan", "--lambda", "-1/2", "--nu", "-1/2", "--window", "-3/2:3/2"]);
    assert_eq!(code(&out), 0);
    let row = rows(&out).into_iter().find(|r| r[0] == "1/2" && r[2] == "3/2").unwrap();
    assert_eq!((row[4].as_str(), row[6].as_str()), ("2", "1/2"));
}

#[test]
fn three_point_mult_footer() {
    let out = kn(&[
        "--config",
        THREE_POINTS,
        "structconst",
        "--op",
        "mult",
        "--lambda",
        "0",
        "--nu",
        "0",
        "--window",
        "-1:1",
    ]);
    assert_eq!(code(&out), 0);
    let f = footer(&out, "grading");
    assert!(f.contains("r_low=0") && f.contains("stable=true"), "{f}");
}

#[test]
fn sqrt2_flag_doubles_odd_products() {
    let plain = kn(&["structconst", "--op", "super", "--lambda", "-1/2", "--nu", "-1/2", "--window", "1/2:1/2"]);
    let scaled =
        kn(&["structconst", "--op", "super", "--lambda", "-1/2", "--nu", "-1/2", "--window", "1/2:1/2", "--sqrt2-odd"]);
    assert_eq!(rows(&plain)[0][6], "1");
    assert_eq!(rows(&scaled)[0][6], "2");
    let even =
        kn(&["structconst", "--op", "bracket", "--lambda", "-1", "--nu", "-1", "--window", "1:2", "--sqrt2-odd"]);
    assert_eq!(rows(&even)[0][6], "1");
}

#[test]
fn invalid_op_is_a_usage_error() {
    let out = kn(&["structconst", "--op", "wedge", "--lambda", "0", "--nu", "0"]);
    assert_eq!(code(&out), 2);
}

fn cocycle_value(out: &Output, pattern: &str, n: &str, m: &str) -> String {
    rows(out).into_iter().find(|r| r[0] == pattern && r[1] == n && r[3] == m).unwrap()[5].clone()
}

#[test]
fn classical_cocycle_values() {
    let raw = kn(&["cocycle", "--cycle", "1", "--window", "-2:2"]);
    assert_eq!(code(&raw), 0);
    assert_eq!(cocycle_value(&raw, "ee", "2", "-2"), "6");
    assert_eq!(cocycle_value(&raw, "oo", "3/2", "-3/2"), "-4");
    let norm = kn(&["cocycle", "--cycle", "1", "--window", "-2:2", "--classical-normalization"]);
    assert_eq!(cocycle_value(&norm, "ee", "2", "-2"), "1/2");
    assert_eq!(cocycle_value(&norm, "oo", "3/2", "-3/2"), "-1/3");
    assert!(stdout(&norm).contains("# cycle: 1"));
    assert!(footer(&norm, "boundedness").contains("max_level_nonzero=0 min_level_nonzero=0"));
}

#[test]
fn cocycle_with_connection_and_json() {
    let out = kn(&[
        "--config",
        TWO_POINTS,
        "cocycle",
        "--cycle",
        "1,0",
        "--omega",
        "1/z + z^2",
        "--format",
        "json",
        "--window",
        "-1:1",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cycle"], serde_json::json!([1, 0]));
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["value"].is_string()));
}

#[test]
fn cocycle_errors() {
    assert_eq!(code(&kn(&["--config", TWO_POINTS, "cocycle", "--cycle", "1,0,1"])), 2);
    assert_eq!(code(&kn(&["cocycle", "--omega", "1/(z - 5)"])), 2);
    assert_eq!(code(&kn(&["--config", "{\"in_points\":[]}", "basis", "--lambda", "0"])), 2);
    assert_eq!(code(&kn(&["--config", "/nonexistent/surface.json", "basis", "--lambda", "0"])), 2);
}

#[test]
fn classical_verify_all_passes() {
    let out = kn(&["verify", "--window", "-6:6", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn three_point_rank_suite() {
    let out = kn(&["--config", THREE_POINTS, "verify", "--suite", "rank", "--window", "-2:2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["checks"][0]["measured"]["rank"], 3);
}

#[test]
fn verify_failure_exits_one_with_counterexample() {
    let out = kn(&["--config", TWO_POINTS, "verify", "--suite", "boundedness", "--window", "0:0", "--format", "json"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let failed: Vec<_> = v["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(!failed.is_empty() && failed.iter().all(|c| c.get("counterexample").is_some()));
    assert_eq!(code(&kn(&["verify", "--suite", "everything"])), 2);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--config",
        THREE_POINTS,
        "structconst",
        "--op",
        "super",
        "--lambda",
        "-1",
        "--nu",
        "-1/2",
        "--window",
        "-2:2",
    ];
    let a = kn(&args);
    let b = kn(&args);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    assert_eq!(code(&kn(&with_file)), 0);
    assert_eq!(fs::read(&path).unwrap(), a.stdout);
}
