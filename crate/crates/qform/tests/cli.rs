use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn catalog_space(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("catalog/spaces")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qform-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn qform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qform"))
        .args(args)
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn classify_reports_split_orthogonal_factor() {
    let out = qform(&["classify", &catalog_space("f3_plane")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["unimodular"], true);
    assert_eq!(v["factors"][0]["split_orthogonal"], true);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let space = catalog_space("f3xf3_line");
    for args in [
        vec!["classify", space.as_str()],
        vec!["group", "--space", space.as_str()],
        vec!["dickson", "--space", space.as_str()],
        vec![
            "oracle",
            "verify",
            "--space",
            space.as_str(),
            "--what",
            "all",
        ],
    ] {
        let (a, b) = (qform(&args), qform(&args));
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let v = json_of(&a);
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, again);
    }
}

#[test]
fn oracle_verify_passes_on_the_plane() {
    let out = qform(&[
        "oracle-verify",
        "--space",
        &catalog_space("f3_plane"),
        "--what",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["passed"], true);
}

#[test]
fn missing_file_is_an_input_error() {
    let out = qform(&["validate", "/nonexistent/ring.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["input_error"], true);
}

#[test]
fn invalid_ring_is_reported_not_rejected() {
    let dir = scratch_dir("validate");
    let ring = dir.join("ring.json");
    fs::write(
        &ring,
        r#"{"ring": {"residue": 4}, "sigma": "identity", "u": 2}"#,
    )
    .unwrap();
    let out = qform(&["validate", ring.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["violations"][0]["axiom"], "u is a unit");
}

#[test]
fn non_isometry_is_a_math_failure() {
    let dir = scratch_dir("dickson");
    let iso = dir.join("iso.json");
    fs::write(&iso, r#"{"matrix": [[0, 0], [0, 0]]}"#).unwrap();
    let out = qform(&[
        "dickson",
        "--space",
        &catalog_space("f3_plane"),
        "--iso",
        iso.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_of(&out)["error"].is_string());
}

#[test]
fn text_format_is_flat() {
    let out = qform(&["--format", "text", "classify", &catalog_space("f3_line")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("unimodular")), "{text}");
}
