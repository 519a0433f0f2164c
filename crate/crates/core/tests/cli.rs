//! Runs the `seqvimp` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn seqvimp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqvimp"))
        .args(args)
        .env("SEQVIMP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_data(dir: &Path) -> String {
    let mut text = String::from("a,b,group,y\n");
    for i in 0..60 {
        let a = (i as f64 * 0.37).sin();
        let b = ((i * 7919) % 61) as f64 / 61.0;
        let group = ["u", "v", "w"][i % 3];
        let y = 3.0 * a + if group == "v" { 1.0 } else { 0.0 } + 0.1 * b;
        text.push_str(&format!("{a},{b},{group},{y}\n"));
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn test_command_writes_identical_outputs_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = seqvimp(&[
            "test", "--data", &data, "--target", "y", "--ntree", "20", "--method", "sprt", "--seed", "5",
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let first = run("one");
    let second = run("two");
    for file in ["report.json", "report.csv", "manifest.json"] {
        let a = fs::read(first.join(file)).unwrap();
        let b = fs::read(second.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let csv = fs::read_to_string(first.join("report.csv")).unwrap();
    assert!(csv.starts_with("name,u,decision,p_value,permutations_used,method,test,trajectory"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn format_flag_selects_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chars");
    let o = seqvimp(&["characterize", "--method", "sprt", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("characteristic.json").exists());
    assert!(!out.join("characteristic.csv").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("0.0465389"), "{stdout}");
}

#[test]
fn missing_target_column_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let o = seqvimp(&["test", "--data", &data, "--target", "nope"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn invalid_configuration_exits_with_two() {
    assert_eq!(seqvimp(&["boundaries", "--p0", "0.01", "--p1", "0.04"]).status.code(), Some(2));
    assert_eq!(seqvimp(&["test", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn boundaries_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let o = seqvimp(&["boundaries", "--method", "sprt", "--M", "20", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn simulate_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = seqvimp(&[
        "simulate", "--study", "study2", "--replicates", "2", "--ntree", "10", "--test", "two-sample",
        "--variables", "1,6", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    // Header plus two variables times five methods.
    assert_eq!(csv.lines().count(), 11);
    assert!(out.join("manifest.json").exists());
}
