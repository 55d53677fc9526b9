//! End-to-end tests of the command-line interface: exit-code contract,
//! output formats, and the realize/factorize round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::{json, Value};

use whfactor::json as wire;
use whfactor::matrix;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_whfactor")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn scalar_system(a: f64, b: f64, c: f64, d: f64) -> Value {
    json!({
        "A": [[[a, 0.0]]],
        "B": [[[b, 0.0]]],
        "C": [[[c, 0.0]]],
        "D": [[[d, 0.0]]],
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn check_accepts_valid_system() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_json(dir.path(), "sys.json", &scalar_system(2.0, 0.4, 1.0, 0.0));
    let out = run(&["check", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["ok"], Value::Bool(true));
    assert_eq!(summary["dim_minus"], json!(1));
    assert!((summary["sup_norm"].as_f64().unwrap() - 0.4).abs() < 1e-9);
}

#[test]
fn check_rejects_spectrum_on_circle_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_json(dir.path(), "sys.json", &scalar_system(1.0, 0.1, 0.1, 0.0));
    let out = run(&["check", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unit circle"), "stderr: {stderr}");
}

#[test]
fn malformed_json_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    // unknown keys are rejected as well
    let bad = write_json(
        dir.path(),
        "bad.json",
        &json!({"A": [], "B": [], "C": [], "D": [[[0.0, 0.0]]], "extra": 1}),
    );
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn factorize_scalar_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_json(dir.path(), "sys.json", &scalar_system(2.0, 0.4, 1.0, 0.0));
    let fact_path = dir.path().join("fact.json");
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "factorize",
        sys.to_str().unwrap(),
        "--kyp",
        "--output",
        fact_path.to_str().unwrap(),
        "--report-out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let wh = wire::factorization_from_json(&read_json(&fact_path)).unwrap();
    for j in 0..64 {
        let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 64.0);
        let v_minus = wh.factor_outer.eval(z).unwrap()[(0, 0)];
        let v_plus = wh.factor_inner.eval(z).unwrap()[(0, 0)];
        let expect = (Complex64::ONE - z * 1.6) / (Complex64::ONE - z * 2.0);
        assert!((v_minus - expect).norm() <= 1e-10);
        assert!((v_plus - Complex64::ONE).norm() <= 1e-10);
    }

    let report = read_json(&report_path);
    assert_eq!(report["all_pass"], Value::Bool(true));
    assert_eq!(report["inertia_ok"], Value::Bool(true));
    assert!(report["kyp_margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn factorize_rejects_noncontractive_symbol_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // F(z) = z has sup norm one
    let sys = write_json(dir.path(), "sys.json", &scalar_system(0.0, 1.0, 1.0, 0.0));
    let out = run(&["factorize", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not strictly below one"), "stderr: {stderr}");
}

#[test]
fn factorize_rejects_singular_identity_plus_d_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // F(z) = -0.8 (0.8 z + 1)/(z + 0.8): constant modulus 0.8 on the
    // circle but F(0) = -1, so I + D is singular.
    let sys = write_json(dir.path(), "sys.json", &scalar_system(-1.25, 0.45, 1.0, -1.0));
    let check = run(&["check", sys.to_str().unwrap()]);
    let summary: Value = serde_json::from_slice(&check.stdout).unwrap();
    assert!((summary["sup_norm"].as_f64().unwrap() - 0.8).abs() < 1e-6);

    let out = run(&["factorize", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("I + D"), "stderr: {stderr}");
}

#[test]
fn kyp_solves_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_json(dir.path(), "sys.json", &scalar_system(0.0, 1.0, 0.5, 0.0));
    let cert_path = dir.path().join("cert.json");
    let out = run(&[
        "kyp",
        sys.to_str().unwrap(),
        "--output",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let cert = read_json(&cert_path);
    let h = cert["H"][0][0][0].as_f64().unwrap();
    assert!(h > 0.25 && h < 1.0, "H = {h}");
    assert_eq!(cert["inertia"], json!([1, 0]));
    assert!(cert["margin"].as_f64().unwrap() > 0.0);

    // verifying the produced H succeeds
    let h_path = write_json(dir.path(), "h.json", &cert["H"].clone());
    let out = run(&[
        "kyp",
        sys.to_str().unwrap(),
        "--verify",
        h_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // an inadmissible H fails with exit 2
    let bad_h = write_json(dir.path(), "bad_h.json", &json!([[[0.1, 0.0]]]));
    let out = run(&[
        "kyp",
        sys.to_str().unwrap(),
        "--verify",
        bad_h.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let margins: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(margins["kyp_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn realize_produces_expected_system() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_json(
        dir.path(),
        "symbol.json",
        &json!({
            "constant": [[[0.0, 0.0]]],
            "poly_coeffs": [],
            "simple_poles": [{"q": [0.5, 0.0], "residue": [[[-0.2, 0.0]]]}],
        }),
    );
    let sys_path = dir.path().join("sys.json");
    let out = run(&[
        "realize",
        spec.to_str().unwrap(),
        "--output",
        sys_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let sys = wire::system_from_json(&read_json(&sys_path)).unwrap();
    assert_eq!(sys.order(), 1);
    assert!((sys.a()[(0, 0)].re - 2.0).abs() < 1e-12);
    let f = sys.transfer(Complex64::ONE).unwrap();
    assert!((f[(0, 0)].re + 0.4).abs() < 1e-12);

    // a pole on the circle is a mathematical check failure
    let bad = write_json(
        dir.path(),
        "bad.json",
        &json!({
            "constant": [[[0.0, 0.0]]],
            "poly_coeffs": [],
            "simple_poles": [{"q": [1.0, 0.0], "residue": [[[1.0, 0.0]]]}],
        }),
    );
    let out = run(&["realize", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn toeplitz_scalar_hand_case() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_json(dir.path(), "sys.json", &scalar_system(2.0, 0.4, 1.0, 0.0));
    let rhs = write_json(dir.path(), "rhs.json", &json!([[1.0, 0.0]]));
    let out = run(&[
        "toeplitz",
        sys.to_str().unwrap(),
        rhs.to_str().unwrap(),
        "--n-blocks",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((result["solution"][0][0].as_f64().unwrap() - 1.25).abs() <= 1e-12);
    assert!(result["max_deviation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn generate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "generate",
            "--seed",
            "11",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    assert_eq!(
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap()
    );
}

/// Generate, realize and factorize through the CLI, then re-evaluate the
/// factor product against the rational symbol data.
#[test]
fn realize_factorize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let symbol_path = dir.path().join("symbol.json");
    let out = run(&[
        "generate",
        "--seed",
        "5",
        "--dim",
        "2",
        "--output",
        symbol_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let system_path = dir.path().join("system.json");
    let out = run(&[
        "realize",
        symbol_path.to_str().unwrap(),
        "--output",
        system_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let fact_path = dir.path().join("fact.json");
    let out = run(&[
        "factorize",
        system_path.to_str().unwrap(),
        "--side",
        "right",
        "--dsplit",
        "symmetric_sqrt",
        "--output",
        fact_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let spec = wire::symbol_spec_from_json(&read_json(&symbol_path)).unwrap();
    let wh = wire::factorization_from_json(&read_json(&fact_path)).unwrap();
    let dim = spec.dims().0;
    let id = matrix::eye(dim);
    for j in 0..512 {
        let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 512.0);
        let expected = &id + spec.eval(z).unwrap();
        let product = wh.product(z).unwrap();
        assert!(
            matrix::op_norm(&(expected - product)) <= 1e-8,
            "round-trip mismatch at grid point {j}"
        );
    }
}
