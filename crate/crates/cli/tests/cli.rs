use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-fermion")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &TempDir, name: &str, s: &str, n: &str, seed: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let p = path.to_str().unwrap();
    let mut args = vec!["gen", "--s", s, "--n", n, "--seed", seed, "--output", p];
    args.extend_from_slice(extra);
    let o = bin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn integrate_json(path: &Path, kind: &str) -> Value {
    let o = bin(&["integrate", path.to_str().unwrap(), "--kind", kind, "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(stdout(&o).trim()).unwrap()
}

fn complex(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = gen(&dir, "good.json", "2", "4", "7", &["--rotated"]);
    let o = bin(&["validate", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "OK");

    let mut file: Value = serde_json::from_str(&fs::read_to_string(&good).unwrap()).unwrap();
    file["d"][0][1] = serde_json::json!([5.0, 0.0]);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, file.to_string()).unwrap();
    let o = bin(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let table = stdout(&o);
    let line = table.lines().find(|l| l.starts_with("D not Hermitian")).expect("row present");
    assert!(line.ends_with("FAIL"), "{table}");

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"n\": 2,").unwrap();
    assert_eq!(bin(&["validate", broken.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(bin(&["validate", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn real_integral_vanishes_at_s5() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s5.json", "5", "4", "3", &[]);
    let v = integrate_json(&path, "real");
    assert_eq!(complex(&v), (0.0, 0.0));
    assert_eq!(v["note"], "εε′≠−1");
    let o = bin(&["integrate", path.to_str().unwrap(), "--kind", "real"]);
    assert!(stdout(&o).contains("note: εε′≠−1"));
}

#[test]
fn chiral_values_multiply_to_real_at_s2() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s2.json", "2", "8", "11", &["--rotated"]);
    let (pr, pi) = complex(&integrate_json(&path, "chiral+"));
    let (mr, mi) = complex(&integrate_json(&path, "chiral-"));
    let (fr, fi) = complex(&integrate_json(&path, "real"));
    let (re, im) = (pr * mr - pi * mi, pr * mi + pi * mr);
    let scale = fr.hypot(fi);
    assert!((re - fr).hypot(im - fi) < 1e-8 * scale, "{re}+{im}i vs {fr}+{fi}i");
}

#[test]
fn chiral_integral_rejected_outside_s2() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s6.json", "6", "4", "1", &[]);
    let o = bin(&["integrate", path.to_str().unwrap(), "--kind", "chiral+"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s = 2"));
}

#[test]
fn real_integral_is_root_det_at_s4() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s4.json", "4", "8", "5", &["--rotated"]);
    let (fr, fi) = complex(&integrate_json(&path, "real"));
    let (zr, zi) = complex(&integrate_json(&path, "complex"));
    // det(iD) = det D for even n with n/2 even
    assert!(zi.abs() < 1e-10 * zr);
    assert!(fi.abs() < 1e-10 * fr);
    assert!((fr - zr.sqrt()).abs() < 1e-8 * fr, "{fr} vs √{zr}");
}

#[test]
fn double_agrees_and_refuses_zero_mu() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s4.json", "4", "6", "9", &["--plus-dim", "4", "--rotated"]);
    let p = path.to_str().unwrap();
    let o = bin(&["double", p, "--mu", "-0.4,0.9", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["index"], 2);
    assert!(v["relative_difference"].as_f64().unwrap() < 1e-8);

    assert_eq!(bin(&["double", p, "--mu", "0,0"]).status.code(), Some(1));
    let s2 = gen(&dir, "s2.json", "2", "4", "9", &[]);
    assert_eq!(bin(&["double", s2.to_str().unwrap(), "--mu", "1,0"]).status.code(), Some(1));
}

#[test]
fn ensemble_counts_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["ensemble", "--s", "2", "--n", "4", "--count", "3", "--seed", "42"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    let args = ["ensemble", "--s", "4", "--n", "8", "--count", "12", "--seed", "3", "--mu", "0.2,-1"];
    bin(&[&args[..], &["--output", a.to_str().unwrap()]].concat());
    bin(&[&args[..], &["--out", "jsonl", "--output", b.to_str().unwrap()]].concat());
    bin(&[&args[..], &["--out", "jsonl", "--output", c.to_str().unwrap()]].concat());
    assert_eq!(fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 13);
    assert_eq!(fs::read_to_string(&b).unwrap().lines().count(), 12);
}

#[test]
fn ensemble_rejects_infeasible_config() {
    let o = bin(&["ensemble", "--s", "3", "--n", "3", "--count", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["ensemble", "--s", "1", "--n", "4", "--count", "2", "--seed", "1", "--mu", "1,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_matches_ensemble_sample_zero() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "s1.json", "1", "4", "77", &[]);
    let v = integrate_json(&path, "complex");
    let o = bin(&["ensemble", "--s", "1", "--n", "4", "--count", "1", "--seed", "77"]);
    let csv = stdout(&o);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let re: f64 = row[1].parse().unwrap();
    assert!((re - v["re"].as_f64().unwrap()).abs() <= 1e-15 * re.abs());
}

#[test]
fn generated_files_revalidate_for_every_s() {
    let dir = TempDir::new().unwrap();
    for s in 0..8 {
        let n = if s == 4 { "8" } else { "4" };
        let path = gen(&dir, &format!("s{s}.json"), &s.to_string(), n, "2", &["--rotated"]);
        let o = bin(&["validate", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "s={s}: {}", stdout(&o));
    }
}
