use std::fs;
use std::path::Path;
use std::process::Command;

use gradiplate_cli::output::parse_manifest;

fn scratch() -> std::io::Result<tempfile::TempDir> {
    tempfile::tempdir_in(env!("CARGO_TARGET_TMPDIR"))
}

fn gradiplate(out: &Path, sub: &str, params: &[&str]) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gradiplate"));
    cmd.arg(sub).arg("--out").arg(out);
    for p in params {
        cmd.arg("--params").arg(p);
    }
    cmd.output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn manifest(out: &Path) -> Vec<(String, String)> {
    parse_manifest(&fs::read_to_string(out.join("manifest.txt")).expect("manifest written"))
}

fn lookup<'a>(m: &'a [(String, String)], key: &str) -> Option<&'a str> {
    m.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

#[test]
fn zero_preset_gives_zero_csv() {
    let dir = scratch().unwrap();
    assert_eq!(
        gradiplate(
            dir.path(),
            "simulate",
            &["initial=zero", "t_end=0.1", "modes=4"]
        ),
        0
    );
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,E,kinetic,bending,thermal,D,energy_balance_residual")
    );
    for line in lines {
        assert!(
            line.split(',')
                .skip(1)
                .all(|v| v.parse::<f64>().unwrap() == 0.0),
            "{line}"
        );
    }
    assert_eq!(lookup(&manifest(dir.path()), "status"), Some("pass"));
}

#[test]
fn regime_mismatch_exits_2_with_manifest() {
    let dir = scratch().unwrap();
    assert_eq!(
        gradiplate(dir.path(), "simulate", &["c=-1", "regime=stable"]),
        2
    );
    let m = manifest(dir.path());
    assert_eq!(lookup(&m, "exit_code"), Some("2"));
    assert!(lookup(&m, "error").unwrap().contains("regime mismatch"));
}

#[test]
fn degenerate_capacity_exits_2() {
    let dir = scratch().unwrap();
    assert_eq!(gradiplate(dir.path(), "quasistatic", &["c=-0.5"]), 2);
    assert!(lookup(&manifest(dir.path()), "error")
        .unwrap()
        .contains("degenerate effective capacity"));
}

#[test]
fn unknown_key_exits_2() {
    let dir = scratch().unwrap();
    assert_eq!(gradiplate(dir.path(), "spectrum", &["colour=red"]), 2);
    assert!(lookup(&manifest(dir.path()), "error")
        .unwrap()
        .contains("unknown key"));
}

#[test]
fn failed_check_exits_3() {
    let dir = scratch().unwrap();
    assert_eq!(
        gradiplate(dir.path(), "nondiff", &["nondiff_tolerance=1e-9"]),
        3
    );
    let m = manifest(dir.path());
    assert_eq!(lookup(&m, "status"), Some("check_failed"));
    assert_eq!(lookup(&m, "check.final_gap.status"), Some("fail"));
    assert!(dir.path().join("nondiff.csv").exists());
}

#[test]
fn overflow_exits_4() {
    let dir = scratch().unwrap();
    let code = gradiplate(
        dir.path(),
        "backward",
        &[
            "initial=coefficients",
            "modes=64",
            "theta=0,0,0,0,0,0,0,1",
            "t_end=100",
            "dt=1",
        ],
    );
    assert_eq!(code, 4);
    assert!(lookup(&manifest(dir.path()), "error")
        .unwrap()
        .contains("non-finite"));
}

#[test]
fn help_and_usage_errors() {
    let help = Command::new(env!("CARGO_BIN_EXE_gradiplate"))
        .args(["simulate", "--help"])
        .output()
        .unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--params"));
    let bad = Command::new(env!("CARGO_BIN_EXE_gradiplate"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn single_frequency_scan() {
    let dir = scratch().unwrap();
    assert_eq!(
        gradiplate(
            dir.path(),
            "resolvent-scan",
            &["omega_grid=list", "omega_values=0", "modes=8"]
        ),
        0
    );
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn config_file_and_overrides() {
    let dir = scratch().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# spectrum of a stiffer plate\nc = 4\nmodes = 3 # few\nstrip_count = 0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_gradiplate"))
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--params", "rho=2;eta=0.5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let m = manifest(&out);
    assert_eq!(lookup(&m, "config.c"), Some("4"));
    assert_eq!(lookup(&m, "config.rho"), Some("2"));
    assert_eq!(lookup(&m, "config.eta"), Some("0.5"));
    assert_eq!(
        fs::read_to_string(out.join("spectrum.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let dir = scratch().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_gradiplate"))
            .env("GRADIPLATE_THREADS", threads)
            .args(["simulate", "--out"])
            .arg(dir.path())
            .args([
                "--params",
                "modes=32;t_end=1;initial=first-mode-bend+thermal-pulse",
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        assert_eq!(lookup(&manifest(dir.path()), "threads"), Some(threads));
        fs::read(dir.path().join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}
