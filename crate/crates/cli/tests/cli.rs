use std::path::Path;
use std::process::{Command, Output};

fn billiard(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn validate_default_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let o = billiard(dir.path(), &["validate"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("(H): pass"));
    assert!(dir.path().join("validate.csv").exists());
}

#[test]
fn spectrum_then_theorem1_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(billiard(dir.path(), &["spectrum", "--n", "10"]).status.success());
    let o = billiard(dir.path(), &["correlate", "theorem1", "--a", "-0.5", "--b", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    for n in 8..=10 {
        assert!(table.lines().any(|l| l.trim_start().starts_with(&n.to_string())), "{table}");
    }
}

#[test]
fn reversed_interval_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(billiard(dir.path(), &["spectrum", "--n", "6"]).status.success());
    let o = billiard(dir.path(), &["correlate", "pi", "--a", "1", "--b", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("interval requires a < b"));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(billiard(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn correlate_without_spectrum_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = billiard(dir.path(), &["correlate", "pi", "--a", "-1", "--b", "1"]);
    assert_eq!(o.status.code(), Some(1));
}
