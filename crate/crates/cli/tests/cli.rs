//! End-to-end checks of the binary: exit codes, CSV surface, point dump.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_mdiqkd")
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const NARROW: &str = "[sweep]\nloss_start_db = 0.0\nloss_end_db = 4.0\nloss_step_db = 2.0\n\n\
[decoy]\nmu_prime_min = 0.2\nmu_prime_max = 0.6\nmu_prime_step = 0.1\n";

#[test]
fn sweep_emits_the_documented_csv_surface() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "narrow.toml", NARROW);
    let out = Command::new(exe()).arg("sweep").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "loss_db,mu_prime_star,S_Z_mumu',E_Z_mumu',S_X_mumu',E_X_mumu',Y11_Z_true,Y11_Z_lower,\
         Y11_X_true,Y11_X_lower,e11_X_true,e11_X_upper,R_3decoy,R_infinite,flags"
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bad.toml", "[sweep]\nloss_step_db = -1.0\n");
    let out = Command::new(exe()).arg("sweep").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("loss_step_db"), "{err}");

    let out = Command::new(exe())
        .arg("sweep")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_and_rejects_over_capacity() {
    let out = Command::new(exe())
        .args(["verify", "--max-photons", "2", "--dark", "0,0.01"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("all passed"), "{text}");
    assert!(text.contains("comparisons"), "{text}");

    let out = Command::new(exe())
        .args(["verify", "--max-photons", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn point_dumps_the_full_gain_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "narrow.toml", NARROW);
    let out = Command::new(exe())
        .args(["point"])
        .arg(&cfg)
        .args(["--loss-db", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "[gain table]",
        "S_Z[mu',mu']",
        "S_X[0,0]",
        "Y11_Z_lower",
        "e11_X_as_printed",
        "y11_denominator",
        "R_3decoy",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
}
