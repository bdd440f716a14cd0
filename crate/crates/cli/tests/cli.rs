use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_sectorange");

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "diag.json", r#"{"n": 2, "re": [[1, 0], [0, 10]], "im": [[0, 0], [0, 1]]}"#);
    write(
        dir.path(),
        "identity.json",
        r#"{"d": 2, "grid": [1, 1], "cells": [{"n": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}]}"#,
    );
    write(
        dir.path(),
        "rotation.json",
        r#"{"d": 2, "grid": [1, 1], "cells": [{"n": 2, "re": [[1, -0.5], [0.5, 1]], "im": [[0, 0], [0, 0]]}]}"#,
    );
    write(
        dir.path(),
        "complex.json",
        r#"{"d": 2, "grid": [2, 1], "cells": [
            {"n": 2, "re": [[1, 0.2], [0.1, 1.5]], "im": [[0.4, 0], [0.1, -0.2]]},
            {"n": 2, "re": [[2, 0], [0, 1]], "im": [[0, 0.3], [0.3, 0.5]]}]}"#,
    );
    write(
        dir.path(),
        "b.json",
        r#"{"n": 3, "re": [[2, 0.3, 0], [0.1, 1.5, 0.2], [0, 0.4, 3]], "im": [[0.5, 0, 0.2], [0.1, -0.3, 0], [0, 0.2, 0.8]]}"#,
    );
    dir
}

fn radians(v: &Value) -> f64 {
    v["radians"].as_f64().unwrap()
}

fn f64_of(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn diagonal_example_angles() {
    let dir = workspace();
    let out = run_in(dir.path(), &["analyze-matrix", "diag.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["results"];
    assert!((radians(&res["omega"]) - 0.1f64.atan()).abs() < 1e-8);
    assert!((radians(&res["alpha"]) - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
    assert!((radians(&res["alpha_bar"]) - 10f64.atan()).abs() < 1e-8);
    assert!((res["omega"]["degrees"].as_f64().unwrap() - 0.1f64.atan().to_degrees()).abs() < 1e-6);
    assert_eq!(r["passed"], Value::Bool(true));
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["witness"].is_null()));
}

#[test]
fn identity_field_example() {
    let dir = workspace();
    let out = run_in(dir.path(), &["analyze-field", "identity.json", "--p", "2,4"]);
    assert_eq!(out.status.code(), Some(0));
    let res = report(&out)["results"].clone();
    assert_eq!(radians(&res["alpha"]), 0.0);
    assert_eq!(res["q"], Value::String("inf".into()));
    let rows = res["exponents"].as_array().unwrap();
    assert!((f64_of(&rows[1]["delta_p"]) - 0.5).abs() < 1e-12);
    // ω_4(I) = arctan σ_4 = π/6
    assert!((radians(&rows[1]["omega_p_max"]) - std::f64::consts::FRAC_PI_6).abs() < 1e-9);
    assert!((radians(&rows[0]["psi_p"])).abs() < 1e-15);
}

#[test]
fn dirichlet_laplacian_in_disguise() {
    let dir = workspace();
    let out = run_in(dir.path(), &["fem-check", "rotation.json", "--nx", "16", "--ny", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let res = report(&out)["results"].clone();
    assert!(radians(&res["generalized_angle"]) <= 1e-8);
    assert!((radians(&res["omega_mu"]) - 0.5f64.atan()).abs() < 1e-12);
    assert_eq!(res["note"], Value::String("ω(μ) = arctan 0.5".into()));
}

#[test]
fn neumann_sides_keep_the_skew_part() {
    let dir = workspace();
    let out = run_in(dir.path(), &["fem-check", "rotation.json", "--nx", "8", "--ny", "8", "--dirichlet", "left", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let res = report(&out)["results"].clone();
    let angle = radians(&res["generalized_angle"]);
    assert!(angle > 1e-6 && angle <= 0.5f64.atan() + 1e-8, "angle {angle}");
}

#[test]
fn reports_are_byte_identical() {
    let dir = workspace();
    for args in [
        &["analyze-matrix", "b.json"][..],
        &["analyze-field", "complex.json"],
        &["calculus-check", "b.json"],
        &["pform-check", "identity.json", "--samples", "2", "--grid", "65", "--seed", "3"],
    ] {
        let a = run_in(dir.path(), args);
        let b = run_in(dir.path(), args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let dir = workspace();
    let out = run_in(dir.path(), &["analyze-matrix", "diag.json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"radians\": 9.96686524911620"));
    assert!(text.contains("\"m\": 1.0000000000000000e0"));
}

#[test]
fn json_and_csv_files() {
    let dir = workspace();
    let out = run_in(dir.path(), &["analyze-matrix", "diag.json", "--n-dirs", "64", "--csv-out", "plot.csv", "--json-out", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["results"]["boundary_points"], Value::from(64));
    let csv = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("series,re,im"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.iter().filter(|l| l.starts_with("boundary,")).count(), 64);
    assert_eq!(rows.iter().filter(|l| l.starts_with("ray_upper,")).count(), 2);
    assert_eq!(rows.iter().filter(|l| l.starts_with("ray_lower,")).count(), 2);
}

#[test]
fn scenario_paths_are_relative_to_the_file() {
    let dir = workspace();
    std::fs::create_dir(dir.path().join("cases")).unwrap();
    std::fs::copy(dir.path().join("rotation.json"), dir.path().join("cases/mu.json")).unwrap();
    write(
        &dir.path().join("cases"),
        "fem.json",
        r#"{"kind": "fem", "field": "mu.json", "mesh": {"nx": 8, "ny": 8, "Lx": 2, "Ly": 1}, "dirichlet": ["left", "right", "top", "bottom"]}"#,
    );
    let out = run_in(dir.path(), &["run", "cases/fem.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["scenario"]["mesh"]["nx"], Value::from(8));
    assert!(r["scenario"]["field_data"].is_object());
}

#[test]
fn report_scenario_reruns_without_inputs() {
    let dir = workspace();
    let first = run_in(dir.path(), &["calculus-check", "b.json", "--eps", "0.1,0.01"]);
    assert_eq!(first.status.code(), Some(0));
    let r1 = report(&first);
    let other = tempfile::tempdir().unwrap();
    write(other.path(), "scenario.json", &r1["scenario"].to_string());
    let second = run_in(other.path(), &["run", "scenario.json"]);
    assert_eq!(second.status.code(), Some(0), "{}", String::from_utf8_lossy(&second.stderr));
    let r2 = report(&second);
    assert_eq!(r1["results"], r2["results"]);
    assert_eq!(r1["checks"], r2["checks"]);
}

#[test]
fn parse_errors_exit_with_one() {
    let dir = workspace();
    write(dir.path(), "broken.json", r#"{"n": 2, "re": [[1, 0], [0, 1]] "im": []}"#);
    let out = run_in(dir.path(), &["analyze-matrix", "broken.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:1:"));
    write(dir.path(), "s.json", r#"{"kind": "matrix", "matrix": "diag.json", "colour": "red"}"#);
    let out = run_in(dir.path(), &["run", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    assert_eq!(run_in(dir.path(), &["no-such-command"]).status.code(), Some(1));
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = workspace();
    let cases: [&[&str]; 6] = [
        &["analyze-field", "identity.json", "--p", "0.5"],
        &["analyze-matrix", "missing.json"],
        &["fem-check", "rotation.json", "--dirichlet", "north"],
        &["fem-check", "rotation.json", "--nx", "0"],
        &["calculus-check", "b.json", "--lambda", "1"],
        &["selftest", "--only", "42"],
    ];
    for args in cases {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    write(dir.path(), "short.json", r#"{"n": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}"#);
    let out = run_in(dir.path(), &["analyze-matrix", "short.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("matrix.re"));
}

#[test]
fn failed_checks_exit_with_three_and_carry_witnesses() {
    let dir = workspace();
    let out = run_in(dir.path(), &["fem-check", "complex.json", "--nx", "4", "--ny", "4", "--theta", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(false));
    let check = &r["checks"][0];
    assert_eq!(check["passed"], Value::Bool(false));
    let q = &check["witness"]["rayleigh_quotient"];
    assert!(f64_of(&q["im"]).abs() > 0.0);
}

#[test]
fn numeric_errors_exit_with_four() {
    let dir = workspace();
    write(dir.path(), "indefinite.json", r#"{"n": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]}"#);
    let out = run_in(dir.path(), &["calculus-check", "indefinite.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tolerance_override_applies_to_every_check() {
    let dir = workspace();
    let out = run_in(dir.path(), &["analyze-matrix", "diag.json", "--tol-override", "0.5"]);
    let r = report(&out);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["tolerance"] == 0.5));
    assert_eq!(r["scenario"]["tol_override"], Value::from(0.5));
}

#[test]
fn calculus_report_covers_every_part() {
    let dir = workspace();
    let out = run_in(dir.path(), &["calculus-check", "b.json", "--functions", "rat1;res:-1;poly:1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let res = &r["results"];
    assert_eq!(res["functions"].as_array().unwrap().len(), 3);
    assert!(res["functions"][2]["von_neumann"].is_null());
    assert_eq!(res["approximants"].as_array().unwrap().len(), 3);
    assert!(!res["resolvent"].as_array().unwrap().is_empty());
    assert!(!res["semigroup"].as_array().unwrap().is_empty());
    assert!(res["convergence"]["monotone"].as_bool().unwrap());
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("crouzeix ratio (poly:1,2)")));
    assert!(names.iter().any(|n| n.starts_with("semigroup contraction")));
}

#[test]
fn pform_seed_changes_the_samples() {
    let dir = workspace();
    let a = report(&run_in(dir.path(), &["pform-check", "complex.json", "--samples", "1", "--grid", "65", "--p", "3", "--seed", "1"]));
    let b = report(&run_in(dir.path(), &["pform-check", "complex.json", "--samples", "1", "--grid", "65", "--p", "3", "--seed", "2"]));
    assert_eq!(a["passed"], Value::Bool(true));
    assert_ne!(a["results"]["integrals"][0]["value"], b["results"]["integrals"][0]["value"]);
}

#[test]
fn selftest_subset() {
    let dir = workspace();
    let out = run_in(dir.path(), &["selftest", "--only", "1,4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["summary"]["criteria"], Value::from(2));
    assert!(r["results"].as_array().unwrap().iter().all(|c| c["passed"] == Value::Bool(true)));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS  1"));
}
