// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gatefid::report::{channel_rows_from_csv, Report};
use tempfile::TempDir;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gatefid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gatefid"))
        .args(args)
        .env_remove("GATEFID_THREADS")
        .output()
        .unwrap()
}

fn json_report(args: &[&str]) -> (Report, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = gatefid(&all);
    let code = out.status.code().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let report = Report::from_json(&text).unwrap_or_else(|e| {
        panic!("{e}: stdout={text} stderr={}", String::from_utf8_lossy(&out.stderr))
    });
    (report, code)
}

const CZ_T1: &str = r#"
[gate]
model = "cz"
lambda = "10 MHz*2pi"

[[channels]]
qubit = 1
kind = "relaxation"
rate = "1/(50 us)"
"#;

#[test]
fn budget_cz_single_channel() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let (r, code) = json_report(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let row = &r.channels[0];
    assert_eq!(row.label, "relaxation_q1");
    assert!((row.gamma_tau - 1e-3).abs() < 1e-15);
    assert!((row.coefficient.unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(row.rational_hint.as_deref(), Some("≈ 1/2"));
    assert!((r.fidelity_analytic.unwrap() - (1.0 - 0.5e-3)).abs() < 1e-12);
    assert!(r.warnings.is_empty());
}

#[test]
fn text_report_has_hints() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let out = gatefid(&["budget", cfg.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("≈ 61/80"), "{text}");
    assert!(text.contains("F̄ analytic   = 0.999500000000"), "{text}");
}

#[test]
fn json_round_trip_and_echo_reproduces_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let (r, _) = json_report(&["budget", cfg.to_str().unwrap()]);
    let again = Report::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(again, r);

    let echo = write(dir.path(), "echo.toml", &toml::to_string(&r.config).unwrap());
    let (r2, code) = json_report(&["budget", echo.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r2.config, r.config);
    assert_eq!(r2.fidelity_analytic, r.fidelity_analytic);
    assert_eq!(r2.channels, r.channels);
}

#[test]
fn csv_output_parses() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let out_path = dir.path().join("out.csv");
    let out = gatefid(&[
        "budget",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = channel_rows_from_csv(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2].label, "dephasing_q1");
    assert_eq!(rows[2].rational_hint.as_deref(), Some("≈ 61/80"));
}

#[test]
fn zero_rates_give_unit_fidelity() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "z.toml", "[gate]\nmodel = \"cczs\"\nlambda = \"5 MHz*2pi\"\n");
    let (r, _) = json_report(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(r.fidelity_analytic, Some(1.0));
    let (o, _) = json_report(&["oracle", cfg.to_str().unwrap()]);
    assert!((o.fidelity_oracle.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn oracle_cz_relaxation() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let (r, code) = json_report(&["oracle", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((r.fidelity_oracle.unwrap() - (1.0 - 0.5e-3)).abs() < 5e-6);
    assert!(r.fidelity_analytic.is_none());
}

#[test]
fn monte_carlo_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cz.toml", CZ_T1);
    let args = ["oracle", cfg.to_str().unwrap(), "--mc-samples", "300", "--seed", "17"];
    let (a, _) = json_report(&args);
    let (b, _) = json_report(&args);
    let mc = a.monte_carlo.clone().unwrap();
    assert_eq!(mc.seed, 17);
    assert_eq!(mc.rng, "ChaCha20");
    assert_eq!(a.monte_carlo, b.monte_carlo);
    assert_eq!(a.fidelity_oracle, b.fidelity_oracle);
    assert_eq!(a.provenance.seed, 17);
}

#[test]
fn compare_cczs_within_second_order() {
    let dir = TempDir::new().unwrap();
    // λ = 5 MHz·2π gives τ = π/(√2 λ) ≈ 70.7 ns; rates set Γτ = 1e-3
    let tau = std::f64::consts::PI / (2f64.sqrt() * 2.0 * std::f64::consts::PI * 5e6);
    let rate = 1e-3 / tau;
    let mut text = String::from("[gate]\nmodel = \"cczs\"\nlambda = \"5 MHz*2pi\"\nphi = 0.3\n");
    for (q, kind) in [(1, "relaxation"), (2, "relaxation"), (3, "relaxation"), (1, "dephasing")] {
        text.push_str(&format!(
            "[[channels]]\nqubit = {q}\nkind = \"{kind}\"\nrate = \"{rate} s^-1\"\n"
        ));
    }
    let cfg = write(dir.path(), "cczs.toml", &text);
    let (r, code) = json_report(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let sum = 4.0 * 1e-3;
    assert!(r.residual.unwrap().abs() <= 5.0 * sum * sum, "{:?}", r.residual);
}

#[test]
fn compare_zero_rates_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "z.toml",
        "[gate]\nmodel = \"cz\"\nlambda = \"10 MHz*2pi\"\n[options]\nscales = [1.0, 2.0, 4.0]\n",
    );
    let (r, code) = json_report(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(r.residual.unwrap().abs() <= 1e-9);
    let s = r.scaling.unwrap();
    assert!(s.inconclusive);
    assert!(s.slope.is_none());
}

#[test]
fn sweep_cz_matches_closed_form_and_budget() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{CZ_T1}\n[sweep]\nparameter = \"lambda_tau_over_pi\"\nfrom = 0.8\nto = 1.2\npoints = 41\n"
    );
    let cfg = write(dir.path(), "sweep.toml", &text);
    let (r, code) = json_report(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let table = r.sweep.unwrap();
    assert_eq!(table.rows.len(), 41);
    assert_eq!(table.labels[0], "relaxation_q1");
    for row in &table.rows {
        let x = row.value * std::f64::consts::PI;
        let expected = 0.5 - (2.0 * x).sin() / (20.0 * x);
        assert!((row.coefficients[0] - expected).abs() < 1e-9);
    }
    let (b, _) = json_report(&["budget", cfg.to_str().unwrap()]);
    let mid = &table.rows[20];
    assert!((mid.value - 1.0).abs() < 1e-15);
    assert!((mid.fidelity_analytic - b.fidelity_analytic.unwrap()).abs() < 1e-12);

    let out = gatefid(&["sweep", cfg.to_str().unwrap(), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("lambda_tau_over_pi,coefficient_relaxation_q1,"));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn sweep_cczs_phi_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[gate]\nmodel = \"cczs\"\nlambda = \"5 MHz*2pi\"\n[sweep]\nparameter = \"phi\"\nfrom = 0.0\nto = 6.0\npoints = 5\n",
    );
    let (r, _) = json_report(&["sweep", cfg.to_str().unwrap()]);
    let rows = r.sweep.unwrap().rows;
    for row in &rows[1..] {
        for (a, b) in row.coefficients.iter().zip(&rows[0].coefficients) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[gate]\nmodel = \"cz\"\nlambda = \"10 MHz\"\n");
    let out = gatefid(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("gate.lambda"), "{err}");

    let syntax = write(dir.path(), "syntax.toml", "[gate]\nmodel = \"cz\"\nlambda = \n");
    let out = gatefid(&["budget", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("syntax.toml:3"));

    let out = Command::new(env!("CARGO_BIN_EXE_gatefid"))
        .args(["budget", cfg.to_str().unwrap()])
        .env("GATEFID_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let text = format!("{CZ_T1}\n[options]\nquad_tol = 1e-300\nmax_subdivisions = 4\n");
    let cfg = write(dir.path(), "q.toml", &text);
    let out = gatefid(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn custom_gate_from_matrix_files() {
    let dir = TempDir::new().unwrap();
    // single qubit idling under σ_x rotation by π: X gate
    write(dir.path(), "h.txt", "dim 2\n0,0 0.5,0\n0.5,0 0,0\n");
    write(dir.path(), "x.txt", "dim 2\n0,0 1,0\n1,0 0,0\n");
    write(dir.path(), "l.txt", "dim 2\n0,0 1,0\n0,0 0,0\n");
    let cfg = write(
        dir.path(),
        "custom.toml",
        r#"
[gate]
model = "custom"
dims = [2]
target = "x.txt"
phase_convention = "global"
segments = [{ hamiltonian = "h.txt", unit = "1 MHz*2pi", duration = "0.5 us" }]

[[channels]]
qubit = 1
matrix = "l.txt"
label = "t1"
rate = "1 us^-1"
"#,
    );
    let (r, code) = json_report(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{r:?}");
    let row = r.channels.iter().find(|c| c.label == "t1").unwrap();
    // in-subspace σ⁻ on one qubit: d/(2(d+1)) = 1/3
    assert!((row.coefficient.unwrap() - 1.0 / 3.0).abs() < 1e-9);
}
