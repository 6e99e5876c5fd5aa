use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn quasiorth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiorth"))
        .args(args)
        .env("QUASIORTH_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn self_complementarity_fails_with_exit_1() {
    let d = data("diag2.json");
    let out = quasiorth(&["check", "--a", &d, "--b", &d, "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdicts"]["complementary"], false);
}

#[test]
fn mub_pair_passes_check() {
    let out = quasiorth(&["check", "--a", &data("diag2.json"), "--b", &data("fourier2.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("complementary"));
}

#[test]
fn input_errors_exit_2() {
    let out = quasiorth(&["check", "--a", &data("diag2.json"), "--b", &data("left_qubit.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
    assert_eq!(quasiorth(&["nonsense"]).status.code(), Some(2));
    let malformed = data("bell_triplet.json");
    assert_eq!(quasiorth(&["check", "--a", &malformed, "--b", &malformed]).status.code(), Some(2));
}

#[test]
fn families_report() {
    let out = quasiorth(&["families", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdicts"]["ell_values"], serde_json::json!([0, 2, 4]));
    assert_eq!(v["artifacts"]["families"].as_array().unwrap().len(), 56);
}

#[test]
fn entropy_json_is_reproducible() {
    let args = [
        "entropy", "--a", &data("bell_masa.json"), "--b", &data("left_qubit.json"),
        "--restarts", "3", "--seed", "11", "--json", "--no-timing",
    ];
    let first = quasiorth(&args);
    let second = quasiorth(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v = json(&first);
    assert_eq!(v["seed"], 11);
    assert!((v["verdicts"]["value_nats"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-3);
    assert!(v["artifacts"]["estimate"]["bound_nats"].is_f64());
}

#[test]
fn bell_factorize_command() {
    let out = quasiorth(&[
        "bell-factorize", "--a", &data("left_qubit.json"), "--triplet", &data("bell_triplet.json"), "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdicts"]["round_trip"], true);
    let bad = quasiorth(&[
        "bell-factorize", "--a", &data("left_qubit.json"), "--triplet", &data("corner_triplet.json"),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn remaining_commands_succeed() {
    for args in [
        vec!["mub", "--dim", "6"],
        vec!["weyl", "--p", "3", "--u", "1,0,1,0", "--v", "0,1,0,1"],
        vec!["catalog"],
        vec!["car"],
        vec!["appendix", "--beta", "0.7853981634"],
    ] {
        let out = quasiorth(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
