use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

fn instance(json: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn invform(args: &[&str], file: Option<&NamedTempFile>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_invform"));
    cmd.args(args);
    if let Some(f) = file {
        cmd.arg(f.path());
    }
    cmd.output().unwrap()
}

fn body(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const J2_Q: &str = r#"{"field":"Q","matrix":[[1,1],[0,1]]}"#;
const J3_Q: &str = r#"{"field":"Q","matrix":[[1,0,0],[1,1,0],[0,1,1]],"gram":[[0,"1/2",1],["1/2",-1,0],[1,0,0]]}"#;
const J3_F101: &str = r#"{"field":{"Fp":101},"matrix":[[1,0,0],[1,1,0],[0,1,1]],"gram":[[0,"1/2",1],["1/2",-1,0],[1,0,0]]}"#;

#[test]
fn decide_skew_on_j2() {
    let f = instance(J2_Q);
    let out = invform(&["decide", "--symmetry", "skew"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(body(&out)["exists"], Value::Bool(true));
    let out = invform(&["decide", "--symmetry", "symmetric"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    let b = body(&out);
    assert_eq!(b["exists"], Value::Bool(false));
    assert!(!b["obstructions"].as_array().unwrap().is_empty());
}

#[test]
fn verify_known_witness() {
    let f = instance(J3_Q);
    let out = invform(&["verify", "--symmetry", "symmetric", "--setting", "invariant"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(body(&out)["verified"], Value::Bool(true));
    let out = invform(&["verify", "--symmetry", "skew"], Some(&f));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_output_verifies() {
    let cases = [
        (J2_Q, "skew", "invariant"),
        (r#"{"field":{"Fp":101},"matrix":[[2,0,0,0],[0,51,0,0],[0,0,1,1],[0,0,0,1]]}"#, "skew", "invariant"),
        (r#"{"field":"Q","matrix":[[0,-1],[1,0]]}"#, "symmetric", "invariant"),
        (r#"{"field":"Q","matrix":[[0,1,0],[0,0,1],[0,0,0]]}"#, "symmetric", "infinitesimal"),
    ];
    for (json, sym, setting) in cases {
        let f = instance(json);
        let out = invform(&["construct", "--symmetry", sym, "--setting", setting], Some(&f));
        assert_eq!(out.status.code(), Some(0), "{json}");
        let b = body(&out);
        assert_eq!(b["exists"], Value::Bool(true), "{json}");
        let round = instance(std::str::from_utf8(&out.stdout).unwrap());
        let out = invform(&["verify"], Some(&round));
        assert_eq!(out.status.code(), Some(0), "{json}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn infinitesimal_subcommand() {
    let f = instance(r#"{"field":"Q","matrix":[[0,1],[0,0]]}"#);
    let out = invform(&["infinitesimal", "--symmetry", "skew"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    let b = body(&out);
    assert_eq!(b["exists"], Value::Bool(true));
    assert_eq!(b["witness"]["setting"], "infinitesimal");
}

#[test]
fn level_and_decompose() {
    let f = instance(J3_F101);
    let out = invform(&["level"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    let b = body(&out);
    assert_eq!(b["level"], 3);
    assert_eq!(b["witt_index"], 1);
    assert_eq!(b["bound_case"], "GeneralOdd");
    let out = invform(&["decompose"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(body(&out)["summands"][0]["kind"], "OddIndecomposable");
}

#[test]
fn missing_gram_is_an_input_error() {
    let f = instance(J2_Q);
    let out = invform(&["level"], Some(&f));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(body(&out)["error"]["kind"], "Parse");
}

#[test]
fn capability_errors_exit_three() {
    let f = instance(r#"{"field":{"Fp":3},"matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#);
    let out = invform(&["decide", "--symmetry", "symmetric"], Some(&f));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(body(&out)["error"]["kind"], "SmallCharacteristic");
    let f = instance(J3_Q);
    let out = invform(&["level"], Some(&f));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(body(&out)["error"]["kind"], "RationalsUnsupported");
}

#[test]
fn malformed_input_exits_two() {
    for json in ["{", r#"{"field":"Q","matrix":[[1,2]]}"#, r#"{"field":"Q","matrix":[["a"]]}"#] {
        let f = instance(json);
        let out = invform(&["real"], Some(&f));
        assert_eq!(out.status.code(), Some(2), "{json}");
        assert!(body(&out)["error"]["kind"].is_string());
    }
    let out = invform(&["decide"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn real_report() {
    let f = instance(r#"{"field":{"Fp":5},"matrix":[[2,0],[0,2]]}"#);
    let out = invform(&["real"], Some(&f));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(body(&out)["is_real"], Value::Bool(false));
    let f = instance(J2_Q);
    assert_eq!(body(&invform(&["real"], Some(&f)))["is_real"], Value::Bool(true));
}

#[test]
fn oracle_requires_seed_and_is_reproducible() {
    let f = instance(J2_Q);
    assert_eq!(invform(&["oracle", "--symmetry", "skew"], Some(&f)).status.code(), Some(2));
    let a = invform(&["oracle", "--symmetry", "skew", "--seed", "9"], Some(&f));
    let b = invform(&["oracle", "--symmetry", "skew", "--seed", "9"], Some(&f));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = body(&a);
    assert_eq!(v["dimension"], 1);
    assert_eq!(v["exists"], Value::Bool(true));
}

#[test]
fn selftest_is_deterministic() {
    let args = ["selftest", "--count", "20", "--seed", "5"];
    let a = invform(&args, None);
    let b = invform(&[&args[..], &["--jobs", "4"]].concat(), None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(body(&a)["passed"], Value::Bool(true));
}
