//! End-to-end checks of the command-line interface: schemas, exit codes,
//! and byte-identical reruns.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pluriflow"))
}

#[test]
fn catalog_list_with_tags() {
    let out = bin()
        .args([
            "catalog",
            "list",
            "--tag",
            "skt_exists",
            "--tag",
            "solvable",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "g2_0\ng4\n");
}

#[test]
fn catalog_show_emits_algebra_json() {
    let out = bin()
        .args(["catalog", "show", "kodaira_thurston"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["algebra"]["dim"], 4);
    assert_eq!(doc["tags"].as_array().unwrap().len(), 2);
}

#[test]
fn check_reports_residuals_and_assert_exit_codes() {
    let out = bin()
        .args([
            "check",
            "--catalog",
            "kodaira_thurston",
            "--metric",
            "identity",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["skt"].as_f64().unwrap() < 1e-12);
    assert!(doc["balanced"].as_f64().unwrap() > 1e-3);
    // --assert-skt passes (exit 0), --assert-kahler fails (exit 1).
    let ok = bin()
        .args(["check", "--catalog", "kodaira_thurston", "--assert-skt"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin()
        .args(["check", "--catalog", "kodaira_thurston", "--assert-kahler"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unknown_key_is_exit_code_two() {
    let out = bin().args(["check", "--catalog", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_writes_csv_with_expected_final_value() {
    let dir = std::env::temp_dir().join("pluriflow_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("kt_flow.csv");
    let out = bin()
        .args([
            "flow",
            "--catalog",
            "kodaira_thurston",
            "--metric",
            "identity",
            "--t-end",
            "3",
            "--sample-dt",
            "0.5",
            "--csv",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,re_g11,im_g11,"));
    let last = lines.last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    let t: f64 = cells[0].parse().unwrap();
    let g11: f64 = cells[1].parse().unwrap();
    assert!((t - 3.0).abs() < 1e-12);
    assert!((g11 - 2.0).abs() < 1e-6, "g11(3) = {g11}");
    // JSON summary on stdout parses and reports the same value.
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["g11_last"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn search_outputs_are_byte_identical_across_runs() {
    let args = [
        "search",
        "skt",
        "--catalog",
        "g4",
        "--starts",
        "16",
        "--seed",
        "9",
        "--workers",
        "3",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(
        a.stdout, b.stdout,
        "same config and seed must give identical bytes"
    );
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["status"], "Feasible");
}

#[test]
fn search_assert_feasible_signals_negatives() {
    let out = bin()
        .args([
            "search",
            "taming",
            "--catalog",
            "kodaira_thurston",
            "--starts",
            "16",
            "--assert-feasible",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bc_dim_torus() {
    let out = bin()
        .args([
            "bc-dim",
            "--catalog",
            "torus_n",
            "--param",
            "n=2",
            "--p",
            "1",
            "--q",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["dim"], 4);
}

#[test]
fn bracket_flow_reconstruction_report() {
    let out = bin()
        .args([
            "bracket-flow",
            "--catalog",
            "kodaira_thurston",
            "--t-end",
            "2",
            "--sample-dt",
            "0.25",
            "--reconstruct",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["reconstruction_max_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn backward_flow_accepts_negative_t_end() {
    let out = bin()
        .args([
            "flow",
            "--catalog",
            "kodaira_thurston",
            "--t-end",
            "-2",
            "--sample-dt",
            "0.05",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = doc["status"]["StoppedDegenerate"]["t"].as_f64().unwrap();
    assert!(t > -1.01 && t < -0.99, "degeneration at {t}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("pluriflow_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{ "catalog": "kodaira_thurston", "metric": "identity" }"#,
    )
    .unwrap();
    let out = bin()
        .args(["check", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["skt"].as_f64().unwrap() < 1e-12);
    assert!(doc["kahler"].as_f64().unwrap() > 0.1);
    // A flag overrides the file: same config, Kähler geometry instead.
    let out = bin()
        .args([
            "check",
            "--config",
            cfg.to_str().unwrap(),
            "--catalog",
            "g2_0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["kahler"].as_f64().unwrap() < 1e-12);
    // Two algebra sources at once are rejected.
    let out = bin()
        .args([
            "check",
            "--catalog",
            "g2_0",
            "--complex-dsl",
            "d a1 = 0; d a2 = 0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_accepts_complex_dsl_input() {
    let out = bin()
        .args([
            "check",
            "--complex-dsl",
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0",
            "--metric",
            "identity",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // The identity metric is Kähler on this frame.
    assert!(doc["kahler"].as_f64().unwrap() < 1e-12);
}
