//! Interface checks of the binary: exit codes, error JSON, artifact shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_randls")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("randls-cli-io").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, m_max: usize) -> PathBuf {
    let path = dir.join("problem.json");
    std::fs::write(
        &path,
        format!(
            r#"{{"basis":{{"kind":"legendre"}},"weights":{{"kind":"algebraic","alpha":1.0}},"d":1,"M":{m_max}}}"#
        ),
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn complexity_example_counts() {
    let dir = workdir("complexity");
    let config = write_config(&dir, 128);
    let out = dir.join("out");
    let output = run(&[
        "complexity",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--eps-grid",
        "0.5,0.1,0.01",
        "--criterion",
        "abs",
    ]);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(out.join("complexity.csv")).unwrap();
    let n_wor: Vec<&str> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(n_wor, vec!["1", "9", "99"]);
}

#[test]
fn missing_config_exits_2_with_error_json() {
    let dir = workdir("missing");
    let output = run(&[
        "sample",
        "--config",
        dir.join("nope.json").to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        dir.join("out").to_str().unwrap(),
        "-m",
        "1",
        "-n",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(parsed["error"]["exit_code"], 2);
}

#[test]
fn malformed_config_exits_2() {
    let dir = workdir("malformed");
    let path = dir.join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    let output = run(&[
        "sample",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        dir.join("out").to_str().unwrap(),
        "-m",
        "1",
        "-n",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_weight_parameter_exits_3() {
    let dir = workdir("badparam");
    let path = dir.join("problem.json");
    std::fs::write(
        &path,
        r#"{"basis":{"kind":"legendre"},"weights":{"kind":"algebraic","alpha":0.4},"d":1,"M":8}"#,
    )
    .unwrap();
    let output = run(&[
        "sample",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        dir.join("out").to_str().unwrap(),
        "-m",
        "1",
        "-n",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn acceptance_failure_exits_4() {
    let dir = workdir("accept");
    let config = write_config(&dir, 16);
    // n = m makes the acceptance test fail at any small retry cap.
    let output = run(&[
        "approximate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        dir.join("out").to_str().unwrap(),
        "-m",
        "8",
        "-n",
        "8",
        "--max-retries",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8(output.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(parsed["error"]["kind"], "acceptance_failure");
}

#[test]
fn truncation_escalation_exits_5() {
    let dir = workdir("trunc");
    let config = write_config(&dir, 32);
    let args_base = [
        "complexity",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "1",
        "--eps-grid",
        "0.001",
        "--criterion",
        "abs",
    ];
    // Markers tolerated by default.
    let mut ok_args: Vec<&str> = args_base.to_vec();
    let out_ok = dir.join("ok");
    ok_args.extend_from_slice(&["--out", out_ok.to_str().unwrap()]);
    let output = run(&ok_args);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(out_ok.join("complexity.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().contains("inf"));
    // Escalated on request.
    let mut strict_args: Vec<&str> = args_base.to_vec();
    let out_strict = dir.join("strict");
    strict_args.extend_from_slice(&["--out", out_strict.to_str().unwrap(), "--fail-on-truncation"]);
    let output = run(&strict_args);
    assert_eq!(output.status.code(), Some(5));
}

#[test]
fn approximate_reproduces_in_span_modes() {
    let dir = workdir("approx");
    let config = write_config(&dir, 16);
    let out = dir.join("out");
    let output = run(&[
        "approximate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
        "-m",
        "4",
        "-n",
        "64",
        "--f-mode",
        "2",
    ]);
    assert!(output.status.success());
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("approximate.json")).unwrap())
            .unwrap();
    let g_error = artifact["g_error"].as_f64().unwrap();
    assert!(g_error <= 1e-10, "g_error {g_error}");
    // Provenance block embeds seed, config hash, and version.
    assert_eq!(artifact["meta"]["seed"], 3);
    assert!(artifact["meta"]["config_hash"].as_str().unwrap().len() == 16);
    assert!(artifact["meta"]["tool_version"].as_str().is_some());
}

#[test]
fn sample_artifact_round_trips() {
    let dir = workdir("sample");
    let config = write_config(&dir, 16);
    let out = dir.join("out");
    let output = run(&[
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
        "-m",
        "2",
        "-n",
        "6",
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(out.join("sample.json")).unwrap();
    let artifact: serde_json::Value = serde_json::from_str(&text).unwrap();
    let sample = randls_core::sampler::SampleSet::from_json(
        &serde_json::to_string(&artifact["sample"]).unwrap(),
    )
    .unwrap();
    assert_eq!(sample.n, 6);
    assert_eq!(sample.m, 2);
    assert_eq!(sample.nodes.len(), 6);
    assert_eq!(sample.stream.seed, 11);
}
