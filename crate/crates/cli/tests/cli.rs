//! End-to-end tests of the `forge` binary: exit codes, artifact layout,
//! atomic writes, and emit/parse round trips.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use forge_core::cert::Certificate;

const BIN: &str = env!("CARGO_BIN_EXE_forge");

fn forge(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("failed to spawn forge")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn graphs_spec(dir: &Path) -> String {
    write_file(
        dir,
        "graphs.json",
        r#"{"signature":[{"name":"E","arity":2}],"mode":{"oracle":"simple_graphs"}}"#,
    )
}

fn k2_target(dir: &Path) -> String {
    write_file(
        dir,
        "k2.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":2,"relations":{"E":[[0,1],[1,0]]}}"#,
    )
}

fn nand_spec(dir: &Path) -> String {
    write_file(
        dir,
        "nand.json",
        r#"{"q":2,"generators":[{"q":2,"arity":2,"table":[1,1,1,0]}]}"#,
    )
}

#[test]
fn check_age_succeeds_and_prints_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let out = forge(&["check-age", "--spec", &spec, "--k", "2"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let cert_line = stdout.lines().find(|l| l.starts_with('{')).expect("certificate on stdout");
    let cert: Certificate = serde_json::from_str(cert_line).unwrap();
    assert_eq!(cert.kind_name(), "age_check");
}

#[test]
fn malformed_json_exits_2_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_file(tmp.path(), "bad.json", "{\"signature\": [\n  {\"name\": }");
    let out = forge(&["check-age", "--spec", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("column"), "stderr: {stderr}");
}

#[test]
fn unknown_field_in_spec_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_file(
        tmp.path(),
        "extra.json",
        r#"{"signature":[{"name":"E","arity":2}],"mode":{"oracle":"simple_graphs"},"bogus":1}"#,
    );
    let out = forge(&["check-age", "--spec", &bad]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_caps_flag_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    for bad in ["queue", "queue=abc", "bogus_key=3"] {
        let out = forge(&["check-age", "--spec", &spec, "--caps", bad]);
        assert_eq!(out.status.code(), Some(2), "--caps {bad} should exit 2");
    }
}

#[test]
fn invalid_forge_threads_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let out = Command::new(BIN)
        .args(["check-age", "--spec", &spec])
        .env("FORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("FORGE_THREADS"), "stderr: {stderr}");
}

#[test]
fn build_limit_writes_artifacts_atomically() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let out_dir = tmp.path().join("limit");
    let out = forge(&[
        "build-limit",
        "--spec",
        &spec,
        "--k",
        "2",
        "--budget",
        "64",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("limit.json").is_file());
    assert!(out_dir.join("manifest.json").is_file());
    assert!(out_dir.join("stage_000.json").is_file());
    // atomic writes leave no temp files behind
    for entry in fs::read_dir(&out_dir).unwrap() {
        let name = entry.unwrap().file_name();
        assert!(!name.to_string_lossy().ends_with(".tmp"), "leftover temp file {name:?}");
    }
}

#[test]
fn emitted_certificate_round_trips_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let out_dir = tmp.path().join("limit");
    let out = forge(&[
        "build-limit",
        "--spec",
        &spec,
        "--k",
        "2",
        "--budget",
        "64",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = fs::read(out_dir.join("limit.json")).unwrap();
    let cert: Certificate = serde_json::from_slice(&bytes).unwrap();
    let again = serde_json::to_vec_pretty(&cert).unwrap();
    assert_eq!(bytes, again, "parse(emit(cert)) must re-emit identical bytes");
}

#[test]
fn verify_accepts_fresh_and_rejects_tampered() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let out_dir = tmp.path().join("out");
    let built = forge(&[
        "check-age",
        "--spec",
        &spec,
        "--k",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(built.status.success());
    let cert_path = out_dir.join("age_check.json");
    let verified = forge(&["verify", cert_path.to_str().unwrap()]);
    assert!(verified.status.success());

    // raising a report bound past the certificate bound must be caught
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cert_path).unwrap()).unwrap();
    let bound = v["reports"][0]["bound"].as_u64().unwrap();
    v["reports"][0]["bound"] = serde_json::Value::from(bound + 1);
    let tampered = write_file(tmp.path(), "tampered.json", &v.to_string());
    let rejected = forge(&["verify", &tampered]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_3_with_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = graphs_spec(tmp.path());
    let target = k2_target(tmp.path());
    let out_dir = tmp.path().join("partial");
    let out = forge(&[
        "build-universal-hom",
        "--spec",
        &spec,
        "--target",
        &target,
        "--k",
        "3",
        "--budget",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("partial"), "stderr: {stderr}");
    assert!(out_dir.join("manifest.json").is_file());
    assert!(out_dir.join("universal_hom.json").is_file());
}

#[test]
fn bracket_closure_reports_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = nand_spec(tmp.path());
    let out = forge(&["bracket-closure", "--spec", &spec, "--k", "2"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("depth:"), "stdout: {stdout}");
}

#[test]
fn clone_decompose_accepts_explicit_retraction() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_file(
        tmp.path(),
        "sr.json",
        r#"{
          "small":{"signature":[{"name":"E","arity":2}],"size":2,"relations":{"E":[]}},
          "big":{"signature":[{"name":"E","arity":2}],"size":4,"relations":{"E":[]}},
          "r":[0,1,2,3],
          "eps":[0,1,2,3]
        }"#,
    );
    let out_dir = tmp.path().join("clone");
    let out = forge(&[
        "clone-decompose",
        "--spec",
        &spec,
        "--k",
        "2",
        "--budget",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let cert: Certificate =
        serde_json::from_str(&fs::read_to_string(out_dir.join("clone_decompose.json")).unwrap())
            .unwrap();
    assert_eq!(cert.kind_name(), "clone_decompose");
}

#[test]
fn missing_input_file_exits_2() {
    let out = forge(&["check-age", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
}
