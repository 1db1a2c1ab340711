use ergolab::dynamics::{ComponentEntry, ComponentId, Embedding, SystemSpec, TransformDescriptor};
use ergolab::gallery::GOLDEN;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).output().expect("spawn ergolab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `A_n` column of a curve CSV.
fn averages(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect()
}

fn identity_spec(dir: &Path) -> String {
    let sys = SystemSpec {
        name: "identity".into(),
        components: vec![ComponentEntry { id: ComponentId::LimitCircle, transform: TransformDescriptor::Identity }],
        family: None,
        embedding: Embedding::default(),
        approach: None,
        metadata: None,
    };
    let path = dir.join("identity.json");
    fs::write(&path, sys.to_json()).unwrap();
    path.display().to_string()
}

#[test]
fn list_shows_gallery_with_expectations() {
    let o = ergolab(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for needle in ["ex1", "U=fails", "zcomp", "III=fails", "rotation", "parameterized"] {
        assert!(s.contains(needle), "{needle} missing from\n{s}");
    }
}

#[test]
fn simulate_writes_one_row_per_n() {
    let o = ergolab(&["simulate", "--system", "ex1", "--point", "circle(1)@0", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 1001);
    assert!(s.starts_with("system,point-id,f-index,n,A_n,delta-to-2n"));
}

#[test]
fn identity_curve_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let spec = identity_spec(dir.path());
    let o = ergolab(&["simulate", "--spec", &spec, "--point", "limit-circle@0.125", "--n", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = averages(&stdout(&o));
    assert_eq!(a.len(), 200);
    assert!(a.iter().all(|v| (v - a[0]).abs() <= 1e-12), "{a:?}");
}

#[test]
fn golden_rotation_curve_decays_like_one_over_n() {
    let o = ergolab(&["simulate", "--system", "rotation", "--n", "5000"]);
    assert_eq!(o.status.code(), Some(0));
    let a = averages(&stdout(&o));
    let c = 1.0 / (PI * GOLDEN).sin();
    for (i, v) in a.iter().enumerate() {
        let n = (i + 1) as f64;
        assert!(v.abs() * n <= c + 1e-9, "n={n}: {v}");
    }
    assert!(a[4999].abs() <= c / 5000.0);
}

#[test]
fn corrupted_spec_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = identity_spec(dir.path());
    let text = fs::read_to_string(&spec).unwrap();
    fs::write(&spec, &text[..text.len() / 2]).unwrap();
    assert_eq!(ergolab(&["check", "--spec", &spec]).status.code(), Some(3));
    assert_eq!(ergolab(&["check", "--system", "nope"]).status.code(), Some(3));
    assert_eq!(ergolab(&["simulate", "--system", "ex1", "--point", "circle(1)@7"]).status.code(), Some(3));
    assert_eq!(ergolab(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn zcomp_check_matches_and_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = ergolab(&["check", "--system", "zcomp", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["zcomp.verdict.json", "manifest.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    let manifest = fs::read_to_string(a.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("zcomp.verdict.json"));

    // the stored verdict feeds the diagram command
    let verdict = a.path().join("zcomp.verdict.json");
    let o = ergolab(&["diagram", "--verdict", verdict.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["consistent"], true);
}

#[test]
fn example3_check_matches() {
    let o = ergolab(&["check", "--system", "ex3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["system"], "ex3");
}

#[test]
fn rotation_certificate_is_valid() {
    let o = ergolab(&["certificate", "--system", "rotation", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["valid"], true);
    let n = c["max_n"].as_f64().unwrap();
    assert_eq!(c["bound"].as_f64().unwrap(), 2.0 * n / 0.1);
}

#[test]
fn example1_certificate_fails() {
    let o = ergolab(&["certificate", "--system", "ex1", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["valid"], false);
    assert!(c["failure"].is_string());
}

#[test]
fn bad_epsilon_is_an_input_error() {
    assert_eq!(ergolab(&["certificate", "--system", "rotation", "--epsilon", "0"]).status.code(), Some(3));
}
