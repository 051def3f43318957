use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().expect("spawn sim")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sim-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p
}

const TINY_FIG3: &str = r#"
experiment = "fig3"
trials = 100

[shell]
counts = [300]
altitudes_km = [1000.0]
"#;

#[test]
fn runs_a_tiny_config() {
    let dir = scratch("tiny");
    let cfg = write_config(&dir, TINY_FIG3);
    let out = sim(&["fig3", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("fig3.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "altitude_km,n_sats,mode,mean_latency_ms,stderr_ms,unreachable_frac,trials");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1000,300,inter_satellite,"));
    assert!(lines[2].starts_with("1000,300,gw_relay,"));
    assert!(lines[1].ends_with(",100"));
    let summary = fs::read_to_string(dir.join("fig3_summary.txt")).unwrap();
    assert!(summary.contains("master_seed = 7"));
}

#[test]
fn trials_flag_overrides_config() {
    let dir = scratch("trials");
    let cfg = write_config(&dir, TINY_FIG3);
    let out = sim(&["fig3", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--trials", "120"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("fig3.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",120")));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = scratch("workers");
    let cfg = write_config(&dir, TINY_FIG3);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for (out, w) in [(&a, "1"), (&b, "3")] {
        let o = sim(&["fig3", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", w]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(a.join("fig3.csv")).unwrap(), fs::read(b.join("fig3.csv")).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = scratch("config");
    let unknown_key = write_config(&dir, "trials = 100\nbogus = 1\n");
    assert_eq!(sim(&["fig3", "--config", unknown_key.to_str().unwrap()]).status.code(), Some(2));

    let mismatch = write_config(&dir, TINY_FIG3);
    assert_eq!(sim(&["fig4", "--config", mismatch.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(sim(&["fig9"]).status.code(), Some(2));
    assert_eq!(sim(&["fig3", "--workers", "0", "--trials", "100"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = scratch("io");
    let missing = dir.join("nope.toml");
    assert_eq!(sim(&["fig3", "--config", missing.to_str().unwrap()]).status.code(), Some(3));

    // An output "directory" that is a regular file.
    let blocker = dir.join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(&dir, TINY_FIG3);
    let out = sim(&["fig3", "--config", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_passes() {
    let dir = scratch("validate");
    let out = sim(&["validate", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS ")).count() >= 10);
    assert!(!stdout.contains("FAIL"));
    let csv = fs::read_to_string(dir.join("validate.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "check,statistic,tolerance,passed");
}
