use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn regseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regseq")).args(args).env("REGSEQ_THREADS", "1").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("regseq-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p
}

fn mid(v: &Value) -> f64 {
    v["mid_re"].as_str().unwrap().parse().unwrap()
}

#[test]
fn analyze_pascal() {
    let v = json(&regseq(&["analyze", "--model", "pascal", "--ell-max", "2"]));
    let terms = v["expansion"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    let e = mid(&terms[0]["exponent"]);
    assert!((e - 1.8325063835804514).abs() < 1e-14);
    assert_eq!(v["input"]["q"], 2);
    assert_eq!(v["expansion"]["error_log_power"], 1);
}

#[test]
fn analyze_sum_of_digits() {
    let v = json(&regseq(&["analyze", "--model", "sum-of-digits", "--ell-max", "2"]));
    let t = &v["expansion"]["terms"][0];
    assert_eq!(t["k"], 1);
    let phi0 = t["fluctuation"]["coefficients"].as_array().unwrap().iter().find(|c| c["ell"] == 0).unwrap();
    assert!(phi0["value"]["mid_re"].as_str().unwrap().starts_with("0.72134752"));
    assert_eq!(phi0["status"], "nonzero");
    assert_eq!(v["expansion"]["error_omitted"], true);
}

#[test]
fn malformed_input_is_an_input_error() {
    let p = temp_file("bad.json", r#"{"q": 2, "dimension": 1, "mode": "matrix", "matrices": [[[1]], [["x"]]], "left": [1], "initial": [1]}"#);
    let out = regseq(&["analyze", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("matrices[1][0][0]"), "{err}");
    let missing = regseq(&["jsr", "--input", "/nonexistent/regseq.json"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn validate_reports_mode_violation() {
    let p = temp_file("mode.json", r#"{"q": 2, "dimension": 1, "mode": "sequence", "matrices": [[[2]], [[1]]], "left": [1], "initial": [1]}"#);
    let out = regseq(&["validate", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mode"));
}

#[test]
fn validate_models() {
    for m in ["sum-of-digits", "stern-brocot", "esthetic:3"] {
        let v = json(&regseq(&["validate", "--model", m]));
        let checks = v["checks"].as_array().unwrap();
        assert_eq!(checks.len(), 3, "{m}");
        assert!(checks.iter().any(|c| c.as_str().unwrap().starts_with("functional equation")), "{m}");
    }
    // A small matrix-product representation with mixed signs.
    let p = temp_file(
        "mixed.json",
        r#"{"q": 3, "dimension": 2, "mode": "matrix", "matrices": [[[1, -1], [0, 2]], [[2, 0], [1, 1]], [["1/2", 1], [-1, 0]]], "left": [1, 0], "initial": [1, 1]}"#,
    );
    json(&regseq(&["validate", "--input", p.to_str().unwrap()]));
}

#[test]
fn sample_csv() {
    let out = regseq(&["sample", "--model", "esthetic:4", "--u-points", "8", "--j-scale", "12", "--degree", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "u,j,empirical_re,empirical_im,series_re,series_im,abs_diff");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!(r[0] >= 0.0 && r[0] < 2.0);
        assert!(r[6] < 0.1, "{r:?}");
    }

    let p = temp_file("const.json", r#"{"q": 2, "dimension": 1, "mode": "sequence", "matrices": [[[1]], [[1]]], "left": [1], "initial": [1]}"#);
    let out = regseq(&["sample", "--input", p.to_str().unwrap(), "--u-points", "5", "--j-scale", "10", "--degree", "4", "--format", "json"]);
    let v = json(&out);
    for row in v.as_array().unwrap() {
        assert!(row["abs_diff"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn jsr_output_is_deterministic() {
    let a = regseq(&["jsr", "--model", "pascal", "--jsr-ell-max", "5"]);
    let v = json(&a);
    for key in ["rho_ell", "rho_lower", "R", "witness"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let b = Command::new(env!("CARGO_BIN_EXE_regseq"))
        .args(["jsr", "--model", "pascal", "--jsr-ell-max", "5"])
        .env("REGSEQ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn argument_errors() {
    assert!(!regseq(&["analyze"]).status.success());
    assert!(!regseq(&["analyze", "--model", "pascal", "--input", "x.json"]).status.success());
    assert_eq!(regseq(&["analyze", "--model", "fibonacci"]).status.code(), Some(3));
    let out = regseq(&["analyze", "--model", "pascal", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(3));
}
