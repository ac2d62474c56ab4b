//! End-to-end runs of the `cbnorm` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cbnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnorm"))
        .args(args)
        .env_remove("CBNORM_THREADS")
        .output()
        .expect("run cbnorm")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn fixtures() -> (TempDir, PathBuf, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let i2 = write(dir.path(), "i2.json", r#"{"rows":2,"cols":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#);
    let h2 = write(dir.path(), "h2.json", r#"{"rows":2,"cols":2,"entries":[[[1,0],[1,0]],[[1,0],[-1,0]]]}"#);
    let row = write(dir.path(), "row.json", r#"{"rows":1,"cols":2,"entries":[[[1,0],[1,0]]]}"#);
    (dir, i2, h2, row)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schur_cb_norm_of_identity() {
    let (_d, i2, _, _) = fixtures();
    let out = cbnorm(&["norm", "--kind", "S-cb", s(&i2)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["kind"], "S-cb");
    assert_eq!(v["status"], "optimal");
}

#[test]
fn real_sign_bilinear_norm_is_exact() {
    let (_d, _, h2, _) = fixtures();
    let out = cbnorm(&["norm", "--kind", "B-classical", "--real-signs", s(&h2)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"].as_f64().unwrap(), 2.0);
    assert_eq!(v["exact"], true);
}

#[test]
fn heuristic_results_exit_with_two() {
    let (_d, _, h2, _) = fixtures();
    let out = cbnorm(&["norm", "--kind", "B-classical", "--multistarts", "8", s(&h2)]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["exact"], false);
    assert!((v["value"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn linear_cb_norm_of_a_row() {
    let (_d, _, _, row) = fixtures();
    let out = cbnorm(&["norm", "--kind", "F-cb", s(&row)]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn schur_factor_of_hadamard() {
    let (_d, _, h2, _) = fixtures();
    let out = cbnorm(&["factor", "--kind", "S", s(&h2)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let f = &v["factorization"];
    assert!((f["cost"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(f["rank"], 2);
    assert_eq!(f["kind"], "S");
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn every_factor_kind_reconstructs() {
    let (_d, _, h2, _) = fixtures();
    for kind in ["F", "G", "B", "S", "T"] {
        let out = cbnorm(&["factor", "--kind", kind, s(&h2)]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        assert!(json(&out)["residual"].as_f64().unwrap() < 1e-7, "{kind}");
    }
}

#[test]
fn pairing_identity_check_passes() {
    let out = cbnorm(&["duality", "--check", "pairing-identity", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["max_deviation"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["passed"], true);
}

#[test]
fn polar_check_passes() {
    let out = cbnorm(&["duality", "--check", "polar", "--samples", "2", "--dims", "2x3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["stats"].as_array().unwrap().len(), 3);
}

#[test]
fn ratio_reaches_the_hadamard_value() {
    let out = cbnorm(&["ratio", "--kind", "big", "--dims", "2x2", "--real-signs", "--trials", "40"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["best_ratio"].as_f64().unwrap() >= 1.414);
}

#[test]
fn membership_reports_status() {
    let (_d, i2, _, _) = fixtures();
    let out = cbnorm(&["membership", "--ball", "CB", s(&i2)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "outside");
    let out = cbnorm(&["membership", "--ball", "CS", s(&i2)]);
    assert_eq!(json(&out)["status"], "inside");
}

#[test]
fn malformed_input_exits_with_one() {
    let (d, _, _, _) = fixtures();
    let bad = write(d.path(), "bad.json", r#"{"rows":2,"cols":2,"entries":[[[1,0]]]}"#);
    let out = cbnorm(&["norm", "--kind", "S-cb", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let missing = d.path().join("missing.json");
    assert_eq!(cbnorm(&["norm", "--kind", "S-cb", s(&missing)]).status.code(), Some(1));
    assert_eq!(cbnorm(&["norm", "--kind", "X-cb", s(&bad)]).status.code(), Some(1));
    assert_eq!(cbnorm(&["norm", "--unknown-flag"]).status.code(), Some(1));
}

#[test]
fn tolerance_is_range_checked() {
    let (_d, i2, _, _) = fixtures();
    assert_eq!(cbnorm(&["norm", "--kind", "S-cb", "--tol", "0.5", s(&i2)]).status.code(), Some(1));
    assert_eq!(cbnorm(&["norm", "--kind", "S-cb", "--tol", "0", s(&i2)]).status.code(), Some(1));
    assert_eq!(cbnorm(&["norm", "--kind", "S-cb", "--tol", "1e-2", s(&i2)]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let (d, _, h2, _) = fixtures();
    let target = d.path().join("report.json");
    let out = cbnorm(&["norm", "--kind", "T-cb", "--out", s(&target), s(&h2)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let direct = cbnorm(&["norm", "--kind", "T-cb", s(&h2)]);
    assert_eq!(std::fs::read(&target).unwrap(), direct.stdout);
}

#[test]
fn output_is_byte_stable_across_thread_counts() {
    let (_d, _, h2, _) = fixtures();
    let args = ["norm", "--kind", "B-classical", "--seed", "7", s(&h2)];
    let a = cbnorm(&args);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cbnorm"))
            .args(args)
            .env("CBNORM_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(a.stdout, cbnorm(&args).stdout);
    assert_eq!(a.stdout, run("1").stdout);
    assert_eq!(a.stdout, run("3").stdout);
    assert_eq!(run("0").status.code(), Some(1));
}

#[test]
fn keys_are_sorted() {
    let (_d, i2, _, _) = fixtures();
    let out = cbnorm(&["norm", "--kind", "S-cb", s(&i2)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim_start().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert!(top.contains(&"value"));
}

#[test]
fn stdin_input_is_accepted() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_cbnorm"))
        .args(["norm", "--kind", "G-cb", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"rows":2,"cols":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
}
