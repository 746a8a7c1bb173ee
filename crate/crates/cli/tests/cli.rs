//! End-to-end CLI behavior: exit codes, report schema, determinism and CSV
//! emission.

use std::path::{Path, PathBuf};
use std::process::Command;

use mudich_cli::config::ExperimentConfig;
use mudich_cli::runner::{run, RunOptions};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mudich"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn opts() -> RunOptions {
    RunOptions {
        seed: 0,
        window_scale: 1.0,
        base_dir: configs_dir(),
    }
}

fn load(name: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(configs_dir().join(name)).unwrap();
    ExperimentConfig::from_json(&text).unwrap()
}

#[test]
fn passing_verification_exits_zero_and_writes_report() {
    let out = tempfile::tempdir().unwrap();
    let config = configs_dir().join("poly-dichotomy-verify.json");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report_path = out.path().join("dichotomy-verify.json");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["verdict"]["pass"], true);
    assert_eq!(report["results"]["verification"]["pass"], true);
    // Normalized config echoes every numeric default.
    for (key, value) in report["config"]["numerics"].as_object().unwrap() {
        assert!(!value.is_null(), "numerics.{key} not materialized");
    }
}

#[test]
fn failing_verification_exits_one() {
    let out = tempfile::tempdir().unwrap();
    // beta = 2 overclaims the backward decay of the kernel.
    let bad = r#"{
        "command": "dichotomy-verify",
        "system": {"catalog": "poly-decay"},
        "certificate": {
            "projector": "zero", "k": 1.0,
            "alpha": null, "beta": 2.0,
            "rate": {"kind": "polynomial"}
        },
        "numerics": {}
    }"#;
    let path = out.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    let output = run_cli(&[
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("worst margin") || stderr.contains("violated"), "{stderr}");
}

#[test]
fn malformed_config_exits_two_with_field() {
    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("typo.json");
    std::fs::write(
        &path,
        r#"{"command": "rates-classify", "rate": {"kind": "polynomial"}, "rtae": 1}"#,
    )
    .unwrap();
    let output = run_cli(&["--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("rtae"), "{stderr}");
}

#[test]
fn missing_required_field_exits_two_with_path() {
    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("norate.json");
    std::fs::write(&path, r#"{"command": "rates-classify"}"#).unwrap();
    let output = run_cli(&["--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("config.rate"), "{stderr}");
}

#[test]
fn unsupported_capability_exits_three() {
    let out = tempfile::tempdir().unwrap();
    // A dense 2x2 tabulated system has no spectrum estimator.
    let csv = "0,1,0,0,1\n1,1,0,0,1\n";
    std::fs::write(out.path().join("dense.csv"), csv).unwrap();
    let path = out.path().join("dense-spectrum.json");
    std::fs::write(
        &path,
        r#"{
            "command": "spectrum-estimate",
            "system": {"catalog": "table", "path": "dense.csv", "dimension": 2},
            "rate": {"kind": "exponential"}
        }"#,
    )
    .unwrap();
    let output = run_cli(&["--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3), "{output:?}");
}

#[test]
fn reports_are_deterministic_across_reruns() {
    let config = load("paper-examples.json");
    let (a, _) = run(config.clone(), &opts()).unwrap();
    let (b, _) = run(config, &opts()).unwrap();
    assert_eq!(
        serde_json::to_string(&a.results).unwrap(),
        serde_json::to_string(&b.results).unwrap()
    );
    assert!(a.verdict.pass);
}

#[test]
fn config_echo_round_trips_to_identical_results() {
    let config = load("spectrum-diag.json");
    let (first, _) = run(config, &opts()).unwrap();
    // Re-validate and re-run the echoed (normalized) config.
    let echoed: ExperimentConfig = serde_json::from_str(
        &serde_json::to_string(&first.config).unwrap(),
    )
    .unwrap();
    let (second, _) = run(echoed, &opts()).unwrap();
    assert_eq!(
        serde_json::to_string(&first.results).unwrap(),
        serde_json::to_string(&second.results).unwrap()
    );
    assert_eq!(first.results["resolvent"]["in_resolvent"], true);
}

#[test]
fn seeded_jitter_still_verifies_the_examples() {
    let config = load("poly-dichotomy-verify.json");
    for seed in [0u64, 1, 7] {
        let o = RunOptions {
            seed,
            ..opts()
        };
        let (report, _) = run(config.clone(), &o).unwrap();
        assert!(report.verdict.pass, "seed {seed}");
    }
}

#[test]
fn window_scale_flag_scales_windows() {
    let config = load("poly-dichotomy-verify.json");
    let o = RunOptions {
        window_scale: 0.5,
        ..opts()
    };
    let (report, _) = run(config, &o).unwrap();
    assert_eq!(report.config.numerics.verify_window, Some(25.0));
    assert!(report.verdict.pass);
}

#[test]
fn tabulated_system_evolves_and_emits_csv() {
    let out = tempfile::tempdir().unwrap();
    let config = configs_dir().join("evolve-table.json");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("system-evolve.json")).unwrap(),
    )
    .unwrap();
    // int_0^2 |u| du = 2, via linear interpolation of the tabulated ramp.
    let log_norm = report["results"]["log_norm"].as_f64().unwrap();
    assert!((log_norm - 2.0).abs() < 1e-3, "log_norm {log_norm}");
    let csv = std::fs::read_to_string(out.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,log_norm_phi_t_s");
    assert_eq!(lines.count(), 201);
}

#[test]
fn hull_probe_emits_limit_and_uli_grids() {
    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("hull-probe.json");
    std::fs::write(
        &path,
        r#"{
            "command": "hull-probe",
            "system": {"catalog": "poly-decay"},
            "numerics": {"schedule_end": 26},
            "output": {"format": "json+csv"}
        }"#,
    )
    .unwrap();
    let output = run_cli(&[
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    for name in ["limit_omega.csv", "limit_alpha.csv", "uli_windows.csv"] {
        assert!(out.path().join(name).exists(), "{name} missing");
    }
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("hull-probe.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["results"]["omega"]["verdict"]["verdict"], "convergent-to");
}

#[test]
fn paper_examples_cli_is_all_pass() {
    let out = tempfile::tempdir().unwrap();
    let config = configs_dir().join("paper-examples.json");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("paper-examples.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["results"]["all_pass"], true);
    assert!(report["results"]["checks"].as_array().unwrap().len() >= 18);
}
