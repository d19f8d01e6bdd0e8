use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn otsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otsm"))
        .args(args)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    path.to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const BASE: &str =
    "name = \"cli\"\n[plant]\nm = 0.1\nu_max = 1.0\n[surface]\nkind = \"optimal\"\nalpha = 0.6\n";

#[test]
fn check_prints_normalized_config_and_verdicts() {
    let out = otsm(&["check", "--config", &config("paper_friction.cfg")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[perturbation]"));
    assert!(text.contains("existence condition (alpha > 0.5): satisfied"));
    assert!(text.contains("perturbation bound (|xi| < U): satisfied"));
}

#[test]
fn simulate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.cfg",
        &format!("{BASE}[sim]\nt_end = 0.5\n"),
    );
    let out_dir = dir.path().join("out");
    let out = otsm(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("cli.trajectory.csv").is_file());
    assert!(out_dir.join("cli.report.json").is_file());
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        &format!("{BASE}[perturbation]\nkind = \"harmonic\"\namplitude = 1.5\nomega = 20.0\n"),
    );
    let out = otsm(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must be < U"));

    let cfg = write(
        dir.path(),
        "typo.cfg",
        &format!("{BASE}[sim]\ntend = 1.0\n"),
    );
    let out = otsm(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn divergence_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "div.cfg",
        &format!("{BASE}[sim]\ndt = 0.25\nt_end = 0.5\nx1 = 1.79e308\nx2 = 1.79e308\n"),
    );
    let out = otsm(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_failure_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cfg");
    let out = otsm(&["check", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // output directory below a regular file cannot be created
    let cfg = write(dir.path(), "ok.cfg", &format!("{BASE}[sim]\nt_end = 0.1\n"));
    let blocker = write(dir.path(), "blocker", "");
    let out = otsm(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        &format!("{blocker}/out"),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = otsm(&[
        "sweep",
        "--config",
        &config("sweeps/fig2_alpha.cfg"),
        "--param",
        "surface.alpha",
        "--values",
        "0.3,0.6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("surface.alpha,mode,settling_time,crossings,residual\n"));
    assert!(text.contains("0.3,Twisting,"));
    assert!(text.contains("0.6,Terminal,"));
}
