//! End-to-end tests of the `luejump` binary: exit codes, closed-form
//! table values, report determinism and config-file handling.

use std::process::{Command, Output};

fn luejump(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_luejump"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Value of a named column on the first row matching `n`.
fn csv_field(body: &str, n: &str, column: &str) -> String {
    let mut lines = body.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let idx = header
        .iter()
        .position(|c| *c == column)
        .unwrap_or_else(|| panic!("no column {column}"));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == n {
            return fields[idx].to_string();
        }
    }
    panic!("no row with n = {n}");
}

#[test]
fn gap_preset_reproduces_exponential() {
    // alpha = 0, A = 0, B = 1, n = 1: G = exp(-t)
    let out = luejump(&[
        "gap", "--alpha", "0", "--n-max", "1", "--t", "1", "--format", "csv",
    ]);
    assert!(out.status.success());
    let g: f64 = csv_field(&stdout(&out), "1", "G").parse().unwrap();
    assert!((g - (-1.0f64).exp()).abs() < 1e-12, "G = {g}");
    let h: f64 = csv_field(&stdout(&out), "1", "H_n").parse().unwrap();
    assert!((h + 1.0).abs() < 1e-12, "H_1 = {h}");
}

#[test]
fn gap_preset_handles_t_zero() {
    let out = luejump(&[
        "gap", "--alpha", "0", "--n-max", "1", "--t", "0,1", "--format", "csv",
    ]);
    assert!(out.status.success());
    let body = stdout(&out);
    let row: Vec<&str> = body.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "0"); // t = 0
    let g: f64 = row.last().unwrap().parse().unwrap();
    assert!((g - 1.0).abs() < 1e-25);
}

#[test]
fn b_zero_gives_classical_laguerre() {
    let out = luejump(&[
        "compute", "--alpha", "1", "--a-level", "1", "--b-level", "0", "--t", "1",
        "--n-max", "1", "--format", "csv",
    ]);
    assert!(out.status.success());
    let body = stdout(&out);
    let a0: f64 = csv_field(&body, "0", "alpha_n").parse().unwrap();
    let b1: f64 = csv_field(&body, "1", "beta_n").parse().unwrap();
    assert!((a0 - 2.0).abs() < 1e-25); // 2n + 1 + alpha at n = 0
    assert!((b1 - 2.0).abs() < 1e-25); // n(n + alpha) at n = 1
    // auxiliary columns are blank when B = 0
    assert_eq!(csv_field(&body, "1", "R_n"), "");
}

#[test]
fn empty_grid_is_config_error() {
    let out = luejump(&["compute", "--t", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_needs_two_grid_points() {
    let out = luejump(&["sweep", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_invariants_rejected_with_code_2() {
    let out = luejump(&["verify", "--digits", "25", "--target-digits", "20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_algebraic_passes() {
    let out = luejump(&[
        "verify", "--n-max", "2", "--t", "0.5,2", "--suite", "algebraic",
        "--output", "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 fail"));
}

#[test]
fn absurd_tolerance_exits_one_with_offenders() {
    let out = luejump(&[
        "verify", "--n-max", "1", "--t", "1", "--suite", "differential",
        "--tolerance", "1e-60", "--output", "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("worst offenders"));
}

#[test]
fn reports_are_byte_stable() {
    // identical config (including the output path) must give identical bytes
    let p = std::env::temp_dir().join("luejump-report.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = luejump(&[
            "verify", "--n-max", "2", "--t", "1,3", "--suite", "algebraic",
            "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        runs.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn config_file_applies_and_flags_override() {
    let path = std::env::temp_dir().join("luejump-config.txt");
    std::fs::write(&path, "alpha = 1.5\nn_max = 1\nt_grid = 2\nformat = csv\n").unwrap();
    let out = luejump(&[
        "compute", "--config", path.to_str().unwrap(), "--n-max", "2",
    ]);
    assert!(out.status.success());
    let body = stdout(&out);
    // flag override raised n_max to 2; file set t = 2 and csv format
    assert!(csv_field(&body, "2", "alpha_n") != "");
    let a0: f64 = csv_field(&body, "0", "alpha_n").parse().unwrap();
    assert!(a0 > 2.5, "alpha_0 = {a0} should exceed 1 + alpha = 2.5");
}

#[test]
fn json_config_file_parses() {
    let path = std::env::temp_dir().join("luejump-config.json");
    std::fs::write(
        &path,
        r#"{"alpha": 0.5, "n_max": 1, "t_grid": [1], "suite": "algebraic"}"#,
    )
    .unwrap();
    let out = luejump(&[
        "verify", "--config", path.to_str().unwrap(), "--output", "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_config_key_rejected() {
    let path = std::env::temp_dir().join("luejump-config-bad.txt");
    std::fs::write(&path, "frobnicate = 1\n").unwrap();
    let out = luejump(&["compute", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_scopes_to_n_at_most_three() {
    let out = luejump(&[
        "oracle", "--n-max", "12", "--t", "1", "--digits", "45",
        "--target-digits", "20", "--tolerance", "1e-8", "--format", "csv",
        "--output", "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
