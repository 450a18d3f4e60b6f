//! End-to-end checks of the `run` subcommand and its exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfelim"))
}

fn demo_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/demo.libsvm")
}

#[test]
fn run_produces_outputs_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--data"])
        .arg(demo_data())
        .args([
            "--kernel",
            "linear",
            "--methods",
            "bmfe-qp-emb,rfe",
            "--trials",
            "2",
        ])
        .args(["--seed", "3", "--stop-at", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "curves.csv",
        "config.txt",
        "curves.svg",
        "trace_0_bmfe-qp-emb.csv",
        "trace_1_rfe-frsub.csv",
    ] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("kept 2 trial(s)"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.conf");
    std::fs::write(
        &cfg_path,
        format!(
            "# demo config\ndata={}\nkernel=linear\nmethods=mfe-slack\ntrials=1\nseed=9\nstop_at=6\nout={}\n",
            demo_data().display(),
            dir.path().join("from_config").display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--methods", "mfe-hybrid"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir
        .path()
        .join("from_config/trace_0_mfe-hybrid.csv")
        .exists());
}

#[test]
fn config_errors_exit_one() {
    // Missing required keys.
    let out = bin().args(["run", "--kernel", "linear"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Unknown method.
    let out = bin()
        .args(["run", "--data"])
        .arg(demo_data())
        .args([
            "--kernel",
            "linear",
            "--methods",
            "nonsense",
            "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Unknown kernel.
    let out = bin()
        .args(["run", "--data"])
        .arg(demo_data())
        .args(["--kernel", "sigmoid", "--methods", "rfe", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--data", "/nonexistent/data.libsvm"])
        .args(["--kernel", "linear", "--methods", "rfe", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Malformed dataset.
    let bad = dir.path().join("bad.libsvm");
    std::fs::write(&bad, "+1 nonsense\n-1 1:2\n").unwrap();
    let out = bin()
        .args(["run", "--data"])
        .arg(&bad)
        .args(["--kernel", "linear", "--methods", "rfe", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin().args(["run", "--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
