//! End-to-end checks of the binary: exit codes, config validation, and
//! byte-identical reproduction of emitted CSV files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lagtrack"))
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lagtrack-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

const SMALL_SWEEP: &str = r#"
kind = "delay-sweep"
seed = 3
reps = 2
horizon = 2.0
dt = 0.001

[plant]
nonlinearity = "sine-sigmoid"
order = 2
dim = 1
domain = [[-1.5, 1.5], [-1.5, 1.5]]

[reference]
kind = "sinusoid"
amplitude = 1.0
omega = 1.0

[gains]
lambdas = [-2.0, -2.0]

[kernel]
signal_std = 1.0
lengthscale = 0.2

[noise]
sigma = [0.01]

[data]
n0 = 30
capacity = 200

[delay_sweep]
delta_bars = [0.2, 0.02]
"#;

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn shipped_configs_validate() {
    for name in [
        "delay_sweep.toml",
        "dataset_sweep.toml",
        "online_trigger.toml",
        "tradeoff.toml",
    ] {
        let path = repo_root().join("configs").join(name);
        let out = bin()
            .args(["validate-config", "--config"])
            .arg(&path)
            .output()
            .unwrap();
        assert_code(&out, 0);
    }
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = scratch("badkey");
    let mut body = SMALL_SWEEP.to_string();
    body.push_str("\nmystery_knob = 1\n");
    let cfg = write_config(&dir, &body);
    let out = bin()
        .args(["validate-config", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_code(&out, 2);
}

#[test]
fn inadmissible_delay_bound_is_a_precondition_error() {
    let dir = scratch("badbound");
    let body = SMALL_SWEEP
        .replace("kind = \"delay-sweep\"", "kind = \"online-trigger\"")
        .replace(
            "[delay_sweep]\ndelta_bars = [0.2, 0.02]",
            "[online]\ndelta_bars = [0.6]",
        );
    let cfg = write_config(&dir, &body);
    let out = bin()
        .args(["validate-config", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_code(&out, 4);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("1/(2 L_f)"), "stderr: {stderr}");
}

#[test]
fn mismatched_kind_rejected() {
    let dir = scratch("kind");
    let cfg = write_config(&dir, SMALL_SWEEP);
    let out = bin()
        .args(["dataset-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_code(&out, 2);
}

#[test]
fn sweep_outputs_are_reproducible() {
    let dir = scratch("repro");
    let cfg = write_config(&dir, SMALL_SWEEP);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let run = bin()
            .args(["delay-sweep", "--quiet", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert_code(&run, 0);
    }
    for name in [
        "max_error_vs_delay.csv",
        "error_vs_time_delay_2e-1.csv",
        "error_vs_time_baseline.csv",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let table = fs::read_to_string(out_a.join("max_error_vs_delay.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("label,delta_bar,"));
    assert_eq!(lines.count(), 3, "two sweep rows plus the baseline");
}

#[test]
fn tradeoff_report_round_trips() {
    let dir = scratch("tradeoff");
    let body = SMALL_SWEEP
        .replace("kind = \"delay-sweep\"", "kind = \"tradeoff-sweep\"")
        .replace(
            "[delay_sweep]\ndelta_bars = [0.2, 0.02]",
            "[tradeoff]\ndelta_bar_1 = 0.01\ndelta_bar_2 = [0.01, 0.1]",
        );
    let cfg = write_config(&dir, &body);
    let out = bin()
        .args(["tradeoff", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("disjunct 1"));
    assert!(stdout.contains("verdict"));
    let report = fs::read_to_string(dir.join("tradeoff_report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["entries"].as_array().unwrap().len(), 2);
    // equal delay bounds: certificate verdict must match the direct comparison
    let e0 = &parsed["entries"][0];
    assert_eq!(
        e0["certificate"]["offline_certified"].as_bool().unwrap(),
        e0["direct_comparison"].as_bool().unwrap()
    );
}
