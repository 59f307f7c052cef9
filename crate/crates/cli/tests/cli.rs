//! End-to-end checks of the weilzeta binary: exit codes, report shapes,
//! and byte-identical reruns.

use std::path::Path;
use std::process::{Command, Output};

fn weilzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weilzeta"))
        .args(args)
        .env("WEILZETA_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn fqm_info_a2() {
    let out = weilzeta(&["fqm-info", &fixture("a2.json")]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["order"], 3);
    assert_eq!(report["level"], 3);
    assert_eq!(report["signature_mod_8"], 2);
    assert_eq!(report["anisotropic_at"]["3"], true);
    assert_eq!(report["oddity"], 0);
    // numeric Gauss sum is i√3
    let g = report["gauss_sum_numeric"].as_array().unwrap();
    assert!(g[0].as_f64().unwrap().abs() < 1e-12);
    assert!((g[1].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn fqm_info_trivial_and_formats() {
    let out = weilzeta(&["fqm-info", &fixture("u.json")]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["order"], 1);
    assert_eq!(report["level"], 1);
    let csv = weilzeta(&["fqm-info", &fixture("a2.json"), "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.contains("order,3"));
    assert!(text.contains("level,3"));
}

#[test]
fn fqm_info_error_codes() {
    let bad = weilzeta(&["fqm-info", &fixture("bad_nonsymmetric.json")]);
    assert_eq!(bad.status.code(), Some(2));
    let odd = weilzeta(&["fqm-info", &fixture("odd_rank.json")]);
    assert_eq!(odd.status.code(), Some(3));
    let missing = weilzeta(&["fqm-info", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    for suite in ["weil-mult", "theorem-5-7", "zeta-factor"] {
        let out = weilzeta(&["verify", &fixture("a2.json"), "--suite", suite, "--seed", "5"]);
        assert!(out.status.success(), "suite {suite}: {:?}", out);
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report[0]["passed"], true);
    }
    let unknown = weilzeta(&["verify", &fixture("a2.json"), "--suite", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn verify_detects_injected_corruption() {
    // the documented test hook perturbs one q-value; the Gauss/Milgram
    // block must fail with a counterexample and exit code 1
    let out = Command::new(env!("CARGO_BIN_EXE_weilzeta"))
        .args(["verify", &fixture("a2.json"), "--suite", "zeta-factor", "--seed", "3"])
        .env("WEILZETA_THREADS", "1")
        .env("WEILZETA_TEST_CORRUPT_Q", "1,1/3")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report[0]["suite"], "gauss-milgram");
    assert_eq!(report[0]["passed"], false);
    let failing = report[0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["passed"] == false)
        .expect("a failing check");
    assert!(failing["counterexample"].is_string());
}

#[test]
fn verify_deterministic_output() {
    let a = weilzeta(&["verify", &fixture("a2.json"), "--suite", "weil-mult", "--seed", "9"]);
    let b = weilzeta(&["verify", &fixture("a2.json"), "--suite", "weil-mult", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "byte-identical under a fixed seed");
}

#[test]
fn lfunction_pipeline() {
    let out = weilzeta(&[
        "lfunction",
        &fixture("eigen_a2.json"),
        "--s",
        "4.0,8+2i",
        "--pmax",
        "13",
    ]);
    assert!(out.status.success(), "{:?}", out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["kappa"], 6);
    assert_eq!(report["primes_used"].as_array().unwrap().len(), 3);
    for prime in report["satake"].as_array().unwrap() {
        assert!(prime["residual"].as_f64().unwrap() < 1e-9);
        // unitary parameters from the synthetic data
        let x1 = prime["x1"].as_array().unwrap();
        let n = (x1[0].as_f64().unwrap().powi(2) + x1[1].as_f64().unwrap().powi(2)).sqrt();
        assert!((n - 1.0).abs() < 1e-8);
    }
    for value in report["values"].as_array().unwrap() {
        assert!(value["cross_check_residual"].as_f64().unwrap() < 1e-9);
    }
    // canonical ordering |x1| >= |x2|
    let csv = weilzeta(&[
        "lfunction",
        &fixture("eigen_a2.json"),
        "--s",
        "4.0",
        "--format",
        "csv",
    ]);
    assert!(csv.status.success());
    assert!(String::from_utf8(csv.stdout).unwrap().contains("satake,3,"));
}

#[test]
fn lfunction_missing_prime_warns() {
    // drop the bad prime 3 from the file: command still succeeds with a warning
    let text = std::fs::read_to_string(fixture("eigen_a2.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["primes"].as_object_mut().unwrap().remove("3");
    let tmp = std::env::temp_dir().join("weilzeta_missing3.json");
    std::fs::write(&tmp, serde_json::to_string(&v).unwrap()).unwrap();
    let out = weilzeta(&["lfunction", tmp.to_str().unwrap(), "--s", "4.0"]);
    assert!(out.status.success(), "{:?}", out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["primes_used"].as_array().unwrap().len(), 2);
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn lfunction_error_codes() {
    let nsf = weilzeta(&["lfunction", &fixture("nonsquarefree.json"), "--s", "4.0"]);
    assert_eq!(nsf.status.code(), Some(3));
    let garbage = std::env::temp_dir().join("weilzeta_garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    let bad = weilzeta(&["lfunction", garbage.to_str().unwrap(), "--s", "4.0"]);
    assert_eq!(bad.status.code(), Some(2));
    // bad lambda_0
    let badl = std::env::temp_dir().join("weilzeta_badlambda.json");
    std::fs::write(
        &badl,
        r#"{"kappa": 6, "gram": [[2,1],[1,2]], "primes": {"5": [0.5, 1.0]}}"#,
    )
    .unwrap();
    let out = weilzeta(&["lfunction", badl.to_str().unwrap(), "--s", "4.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zeta_sign_flag() {
    // the fixture was generated in the displayed convention: its
    // cross-check residual is tiny there and explodes in the other
    // convention, which is exactly what the residual column is for
    let displayed = weilzeta(&[
        "lfunction", &fixture("eigen_a2.json"), "--s", "4.0", "--zeta-sign", "displayed",
    ]);
    assert!(displayed.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&displayed.stdout).unwrap();
    assert!(rep["values"][0]["cross_check_residual"].as_f64().unwrap() < 1e-9);
    let corollary = weilzeta(&[
        "lfunction", &fixture("eigen_a2.json"), "--s", "4.0", "--zeta-sign", "corollary",
    ]);
    assert!(corollary.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&corollary.stdout).unwrap();
    assert!(rep["values"][0]["cross_check_residual"].as_f64().unwrap() > 1.0);
    let bad = weilzeta(&[
        "lfunction", &fixture("eigen_a2.json"), "--s", "4.0", "--zeta-sign", "sideways",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
