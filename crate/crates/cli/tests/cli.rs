//! End-to-end checks of the `substock` binary: CSV contract, exit
//! codes, and the human-readable subcommands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_substock"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn sweep_reproduces_the_golden_csv_byte_for_byte() {
    let config = fixture("fixtures/golden_sweep.cfg");
    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let golden = std::fs::read(fixture("golden/sweep.csv")).unwrap();
    assert_eq!(
        out.stdout,
        golden,
        "CSV drifted from the frozen fixture:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn sweep_writes_the_same_bytes_to_a_file() {
    let config = fixture("fixtures/golden_sweep.cfg");
    let tmp = std::env::temp_dir().join("substock_sweep_test.csv");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = std::fs::read(&tmp).unwrap();
    let golden = std::fs::read(fixture("golden/sweep.csv")).unwrap();
    assert_eq!(written, golden);
    let _ = std::fs::remove_file(&tmp);
}

#[test]
fn config_errors_exit_with_code_one() {
    let bad = std::env::temp_dir().join("substock_bad_config.cfg");
    std::fs::write(&bad, "lambda1 = -3\n").unwrap();
    let out = run(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    let _ = std::fs::remove_file(&bad);

    let out = run(&["sweep", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_files_exit_with_code_three() {
    let out = run(&["optimize", "--config", "/nonexistent/path.cfg"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn optimize_prints_one_line_per_variant() {
    let config = fixture("fixtures/golden_sweep.cfg");
    let out = run(&["optimize", "--config", config.to_str().unwrap(), "--c", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
    assert!(text.lines().all(|l| l.contains("profit=")));
}

#[test]
fn simulate_reports_estimates_and_traces() {
    let config = fixture("fixtures/golden_sweep.cfg");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--q1",
        "3",
        "--q2",
        "2",
        "--reps",
        "500",
        "--seed",
        "9",
        "--trace",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("stderr=")).count(), 4);
    assert!(text.lines().any(|l| l.contains(",arrival,")));
    // Same invocation, same numbers.
    let again = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--q1",
        "3",
        "--q2",
        "2",
        "--reps",
        "500",
        "--seed",
        "9",
        "--trace",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
}

#[test]
fn failed_validation_exits_with_code_two() {
    // Doctor the mixed scenario so the weak-product-drop check has no
    // substitution rows to find; the suite must then report a failure.
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("scenarios");
    let tmp = std::env::temp_dir().join("substock_doctored_scenarios");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    for name in ["both_high.cfg", "both_low.cfg", "mixed.cfg"] {
        let mut text = std::fs::read_to_string(scenarios.join(name)).unwrap();
        if name == "mixed.cfg" {
            text = text.replace("substitutions = 0:0, 0.4:0.4", "substitutions = 0:0");
        }
        std::fs::write(tmp.join(name), text).unwrap();
    }
    let out = run(&["validate", "--scenarios", tmp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL"), "{text}");
    let _ = std::fs::remove_dir_all(&tmp);
}
