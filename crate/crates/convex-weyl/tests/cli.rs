//! End-to-end tests of the `convex-weyl` binary: scan determinism, replay
//! of a serialized instance, failure and error exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

use convex_weyl::report::{generate_suite, ScanConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convex-weyl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_vec_pretty(v).unwrap()).unwrap();
}

fn small_scan_config() -> Value {
    json!({
        "seed": 42,
        "suites": ["convexity", "uniformization", "howe"],
        "types": ["A1", "A2"],
        "fields": [[2, 1], [3, 1]],
        "instances": 5,
        "round_trips": 10,
        "samples": 50,
    })
}

#[test]
fn scan_succeeds_and_is_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    write_json(&cfg_path, &small_scan_config());

    let strip_timing = |path: &Path| -> Value {
        let mut v: Value =
            serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        v
    };

    let out1 = dir.path().join("report1.json");
    let out2 = dir.path().join("report2.json");
    for (out, jobs) in [(&out1, "1"), (&out2, "4")] {
        let output = run(&[
            "scan",
            "--config",
            cfg_path.to_str().unwrap(),
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            output.status.success(),
            "stdout: {}\nstderr: {}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let text = String::from_utf8_lossy(&output.stdout);
        assert!(text.contains("overall: PASS"), "{text}");
    }
    let r1 = strip_timing(&out1);
    let r2 = strip_timing(&out2);
    assert_eq!(r1, r2, "report must not depend on worker count");
    assert_eq!(r1["pass"], json!(true));
    for suite in ["convexity", "uniformization", "howe"] {
        assert!(r1["suites"][suite]["pass_count"].as_u64().unwrap() > 0);
        assert_eq!(r1["suites"][suite]["fail_count"], json!(0));
    }
}

#[test]
fn verify_replays_a_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScanConfig::from_value(&small_scan_config()).unwrap();
    let (instances, _) = generate_suite("uniformization", &cfg).unwrap();
    let inst_path = dir.path().join("instance.json");
    write_json(&inst_path, &instances[0]);

    let output = run(&[
        "verify",
        "--suite",
        "uniformization",
        "--instance",
        inst_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("expected:") && text.contains("actual:"));
    assert!(text.trim_end().ends_with("PASS"), "{text}");
}

#[test]
fn verify_perturbed_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScanConfig::from_value(&small_scan_config()).unwrap();
    let (instances, _) = generate_suite("uniformization", &cfg).unwrap();
    let mut inst = instances[0].clone();
    let old = inst["expect_w"][0].as_u64().unwrap();
    inst["expect_w"][0] = json!(old ^ 1);
    let inst_path = dir.path().join("tampered.json");
    write_json(&inst_path, &inst);

    let output = run(&[
        "verify",
        "--suite",
        "uniformization",
        "--instance",
        inst_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("recorded_solution_diff_positions"), "{text}");
    assert!(text.trim_end().ends_with("FAIL"), "{text}");
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    // Missing mandatory seed.
    let cfg_path = dir.path().join("noseed.json");
    write_json(&cfg_path, &json!({"suites": ["convexity"]}));
    let output = run(&["scan", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("seed"));

    // Instance declaring a different suite than requested.
    let cfg = ScanConfig::from_value(&small_scan_config()).unwrap();
    let (instances, _) = generate_suite("convexity", &cfg).unwrap();
    let inst_path = dir.path().join("mismatch.json");
    write_json(&inst_path, &instances[0]);
    let output = run(&[
        "verify",
        "--suite",
        "howe",
        "--instance",
        inst_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("suite"));

    // Unknown suite name in the config.
    let bad_path = dir.path().join("badsuite.json");
    write_json(&bad_path, &json!({"seed": 1, "suites": ["nonsense"]}));
    let output = run(&["scan", "--config", bad_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}
