use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn schlicht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schlicht")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_member_exits_zero() {
    let o = schlicht(&["classify", "--fn", "identity", "--class", "starlike:lambda=0.5", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "member");
    assert!((v["margin"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn assert_member_fails_for_non_member() {
    let o = schlicht(&["classify", "--fn", "koebe", "--class", "convex:lambda=0", "--assert-member"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_two_with_hint() {
    let o = schlicht(&["classify", "--fn", "no_such_function", "--class", "starlike:lambda=0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("error:"), "{err}");
    assert!(err.contains("hint:"), "{err}");
}

#[test]
fn apply_output_round_trips_through_series_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("libera.json");
    let o = schlicht(&["apply", "--op", "bernardi:c=1", "--fn", "koebe", "--order", "32", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    // L_1 of the Koebe function has coefficients 2n/(n+1).
    let coeffs = v["coeffs"].as_array().unwrap();
    for (n, c) in coeffs.iter().enumerate().skip(1) {
        let expected = 2.0 * n as f64 / (n as f64 + 1.0);
        assert!((c[0].as_f64().unwrap() - expected).abs() < 1e-13, "n = {n}");
    }
    let spec = format!("series:path={}", path_str(&out));
    let o = schlicht(&["classify", "--fn", &spec, "--class", "starlike:lambda=0", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn malformed_series_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"order\": 2,\n  \"coeffs\": [[0, 0], [1, 0],\n  [oops]]\n}\n").unwrap();
    let spec = format!("series:path={}", path_str(&bad));
    let o = schlicht(&["classify", "--fn", &spec, "--class", "starlike:lambda=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn config_file_runs_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(&good, r#"{"command": "classify", "function": "identity", "class": "convex:lambda=0"}"#).unwrap();
    let o = schlicht(&["--config", path_str(&good)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"command": "classify", "function": "identity", "klass": "convex"}"#).unwrap();
    let o = schlicht(&["--config", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("klass"), "{}", stderr(&o));
}

#[test]
fn identities_csv_residuals_are_small() {
    let o = schlicht(&["identities", "--all", "--trials", "20", "--report", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "max_relative_residual").unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let r: f64 = record.unwrap()[col].parse().unwrap();
        assert!(r <= 1e-12, "residual {r}");
        rows += 1;
    }
    assert_eq!(rows, 7 * 4 * 3);
}

#[test]
fn verify_and_report_agree() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t27.json");
    let o = schlicht(&["verify-theorem", "--id", "T2_7", "--samples", "4", "--json", path_str(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["theorem"], "T2_7");

    let o = schlicht(&["report", "--input", path_str(&json), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("T2_7"));
}

#[test]
fn unknown_theorem_is_a_usage_error() {
    let o = schlicht(&["verify-theorem", "--id", "T9_9"]);
    assert_eq!(o.status.code(), Some(2));
}
