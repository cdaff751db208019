use std::path::Path;
use std::process::{Command, Output};

use ld_vortex::model::export::read_field_csv;
use ld_vortex::model::{observables, Grid1D, LayeredState, LdParameters};

fn ld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ld-vortex"))
        .args(args)
        .env("LD_VORTEX_LOG", "error")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn perturb_enumerates_all_phase_configurations() {
    let v = json(&ld(&["perturb", "--N", "3", "--L", "1", "--p", "0.5", "--kappa", "1", "--H", "3", "--r", "1e-3"]));
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert_eq!(entries[0]["inertia"], 0);
    assert!(entries.iter().all(|e| e["delta"].as_array().unwrap().len() == 3));
}

#[test]
fn validity_reports_c0() {
    let v = json(&ld(&["validity", "--N", "2", "--L", "1", "--p", "0.5", "--kappa", "1", "--H", "3"]));
    assert!((v["C0"].as_f64().unwrap() - 2.3374).abs() < 1e-3);
}

#[test]
fn validity_csv_covers_the_scan() {
    let out = ld(&["validity", "--scan-L", "1,2,4", "--scan-kappa", "1,3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("N,L,p,kappa,H,C0"));
    assert_eq!(lines.len(), 1 + 6);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"N": 3, "H": 3.0}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let count = |args: &[&str]| json(&ld(args)).as_array().unwrap().len();
    assert_eq!(count(&["perturb"]), 4);
    assert_eq!(count(&["perturb", "--config", cfg]), 8);
    assert_eq!(count(&["perturb", "--config", cfg, "--N", "1"]), 2);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"N": 2, "colour": "red"}"#).unwrap();
    assert_eq!(ld(&["perturb", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ld(&["nonsense"]).status.code(), Some(2));
    assert_eq!(ld(&["perturb", "--kappa", "-1"]).status.code(), Some(2));
    assert_eq!(ld(&["perturb", "--N", "two"]).status.code(), Some(2));
    assert_eq!(ld(&["check", "--preset", "no-such-preset"]).status.code(), Some(2));
    // sin(HpL) = 0
    assert_eq!(ld(&["perturb", "--H", &std::f64::consts::TAU.to_string()]).status.code(), Some(2));
}

fn load_state(path: &Path) -> LayeredState {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    serde_json::from_value(v["state"].clone()).unwrap()
}

#[test]
fn minimize_then_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let out = ld(&[
        "minimize", "--N", "2", "--L", "1", "--p", "0.5", "--kappa", "1", "--H", "3", "--r", "1e-3",
        "--out", run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&run).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(dir.path().join("run.field.csv").exists());

    let field = dir.path().join("field.csv");
    let out = ld(&["export-field", "--input", run.to_str().unwrap(), "--out", field.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let params = LdParameters::desk();
    let state = load_state(&run);
    let grid = Grid1D::new(1.0, state.a.ncols()).unwrap();
    let expected = observables(&state, &params, &grid).unwrap();
    let parsed = read_field_csv(std::fs::File::open(&field).unwrap()).unwrap();
    let close = |a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>| {
        a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
    };
    assert!(close(&expected.f, &parsed.f));
    assert!(close(&expected.h, &parsed.h));
    assert!(close(&expected.jz, &parsed.jz));
    assert!(close(&expected.V, &parsed.V));
}

#[test]
fn flux_command_reports_one_quantum_per_cycle() {
    let v = json(&ld(&["flux", "--H", "8", "--r", "1e-3"]));
    let cycles = v.as_array().unwrap();
    assert!(!cycles.is_empty());
    for c in cycles {
        let flux = c["flux"].as_f64().unwrap();
        assert!((flux - std::f64::consts::TAU).abs() < 0.02 * std::f64::consts::TAU);
    }
}

#[test]
fn lift_export_has_grid_header() {
    let out = ld(&["export-field", "--lift", "4"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("x,z,h"));
}
