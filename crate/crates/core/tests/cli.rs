//! End-to-end runs of the binary against the synthetic market and a small CSV.

use std::path::Path;
use std::process::{Command, Output};

fn regattack(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regattack"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("REGATTACK_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn fit_prints_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["fit"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("SP") && text.contains("EM"), "{text}");
}

#[test]
fn attack_one_writes_results_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["attack-one", "--index", "2", "--eta", "0.1,0.2", "--goal", "max"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "{csv}");
    assert_eq!(lines[0].split(',').count(), 17);
    for chart in ["objective_vs_eta.svg", "beta_before_after.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(chart)).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}

#[test]
fn bad_index_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["attack-one", "--index", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--index"));
    let o = regattack(dir.path(), &["attack-one", "--index", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn budget_past_sigma_min_exits_unbounded() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["attack-rankone", "--index", "1", "--eta", "1.01"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("certificate.txt").exists());
}

#[test]
fn rankone_below_threshold_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["attack-rankone", "--index", "1", "--eta", "0.5", "--max-iter", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("convergence.svg").exists());
}

#[test]
fn multi_attack_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["attack-multi", "--index", "4", "--eta", "0.2", "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_reports_small_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = regattack(dir.path(), &["validate", "--points", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn csv_input_with_column_selection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    let mut text = String::from("date,r,a,b,unused\n");
    for k in 0..12 {
        let a = (k as f64 * 0.7).sin();
        let b = (k as f64 * 1.3).cos();
        text.push_str(&format!("d{k},{},{a},{b},9\n", 0.5 * a - 0.2 * b + 0.01 * k as f64));
    }
    std::fs::write(&path, text).unwrap();
    let o = regattack(
        dir.path(),
        &["--data", path.to_str().unwrap(), "--response", "r", "--features", "a,b", "attack-one", "--index", "1"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    std::fs::write(&path, "r,a\n1,2\n3,oops\n").unwrap();
    let o = regattack(dir.path(), &["--data", path.to_str().unwrap(), "fit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}
