use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn fixture(name: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn scott(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_scott"))
        .args(args)
        .env_remove("SCOTT_JOBS")
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = if stdout.trim().is_empty() { Value::Null } else { serde_json::from_str(&stdout).unwrap() };
    (out.status.code().unwrap(), value, String::from_utf8(out.stderr).unwrap())
}

fn ok(args: &[&str]) -> Value {
    let (code, v, err) = scott(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    v
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_every_violation() {
    assert_eq!(ok(&["validate", "--space", &fixture("path3")]), json!({"valid": true}));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"labels":["x","y","z"],"dist":[["0","1","5"],["1","0","1"],["5","1","0"]]}"#).unwrap();
    let (code, v, _) = scott(&["validate", "--space", path_str(&bad)]);
    assert_eq!(code, 2);
    assert_eq!(v["valid"], json!(false));
    assert_eq!(v["violations"].as_array().unwrap().len(), 2);
}

#[test]
fn rank_prints_both_ranks() {
    let v = ok(&["rank", "--space", &fixture("path3"), "--a", "0", "--b", "1"]);
    assert_eq!(v, json!({"sr": "1", "r_upper": "1", "sr_le_r": true}));
    let v = ok(&["rank", "--space", &fixture("path3"), "--a", "0", "--b", "2", "--f", "geometric:1/4,1/2"]);
    assert_eq!(v, json!({"sr": "inf", "r_upper": "inf", "sr_le_r": true}));
}

#[test]
fn search_reports_exhaustion() {
    let v = ok(&["cas", "search", "--space", &fixture("path3"), "--a", "0", "--b", "1", "--depth", "3"]);
    assert_eq!(v["status"], json!("exhausted"));
    assert!(v.get("max_depth_reached").is_some());
}

#[test]
fn space_rank_and_autoisometries() {
    assert_eq!(ok(&["space-rank", "--space", &fixture("path3")])["rank"], json!("2"));
    assert_eq!(ok(&["auto", "--space", &fixture("square")])["autoisometries"].as_array().unwrap().len(), 8);
    assert_eq!(ok(&["auto", "--space", &fixture("line")]), json!({"autoisometries": [[0, 1, 2, 3]]}));
    let v = ok(&["auto", "--space", &fixture("square"), "--a", "0,1", "--b", "2,3"]);
    assert_eq!(v, json!({"exists": true}));
    let v = ok(&["oracle", "--space", &fixture("path3"), "--a", "0", "--b", "2"]);
    assert_eq!(v, json!({"sr": "inf", "autoisometry": true}));
}

#[test]
fn emitted_certificates_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path3 = fixture("path3");
    let cert = |name: &str| -> PathBuf { dir.path().join(name) };

    let ef = cert("ef.json");
    let v = ok(&["ef", "solve", "--space", &path3, "--a", "0", "--b", "1", "--alpha", "2", "--emit", path_str(&ef)]);
    assert_eq!(v["winner"], json!("player1"));
    assert_eq!(ok(&["ef", "check", "--space", &path3, "--cert", path_str(&ef)])["losing"], json!(0));

    let dist = cert("dist.json");
    ok(&["ef", "distinguish", "--space", &path3, "--a", "0", "--b", "1", "--emit", path_str(&dist)]);
    assert_eq!(ok(&["ef", "check", "--space", &path3, "--cert", path_str(&dist)])["losing"], json!(0));

    let game = cert("game.json");
    let args = ["game", "solve", "--space", &path3, "--a", "0", "--b", "1", "--alpha", "1"];
    let v = ok(&[&args[..], &["--f", "geometric:4,1/2", "--emit", path_str(&game)]].concat());
    assert_eq!(v["winner"], json!("player2"));
    assert_eq!(ok(&["game", "check", "--space", &path3, "--cert", path_str(&game)])["losing"], json!(0));

    let omega = cert("omega.json");
    ok(&["ef", "solve", "--space", &path3, "--a", "0", "--b", "2", "--alpha", "omega", "--emit", path_str(&omega)]);
    let system = cert("system.json");
    ok(&["cas", "extract", "--space", &path3, "--cert", path_str(&omega), "--depth", "3", "--emit", path_str(&system)]);
    assert_eq!(ok(&["cas", "verify", "--space", &path3, "--cert", path_str(&system)])["valid"], json!(true));
    let iso = ok(&["cas", "isometry", "--space", &path3, "--cert", path_str(&system)]);
    assert_eq!(iso["perm"], json!([2, 1, 0]));
    assert_eq!(ok(&["cas", "stream", "--space", &path3, "--cert", path_str(&omega)])["perm"], json!([2, 1, 0]));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path3 = fixture("path3");
    let ef = dir.path().join("ef.json");
    ok(&["ef", "solve", "--space", &path3, "--a", "0", "--b", "2", "--alpha", "omega", "--emit", path_str(&ef)]);
    let mut strategy: Value = serde_json::from_str(&std::fs::read_to_string(&ef).unwrap()).unwrap();
    strategy["pair"]["b"] = json!([1]);
    std::fs::write(&ef, strategy.to_string()).unwrap();
    let (code, v, _) = scott(&["ef", "check", "--space", &path3, "--cert", path_str(&ef)]);
    assert_eq!(code, 2, "{v}");
}

#[test]
fn replay_against_a_script() {
    let dir = tempfile::tempdir().unwrap();
    let path3 = fixture("path3");
    let ef = dir.path().join("ef.json");
    let script = dir.path().join("script.json");
    ok(&["ef", "distinguish", "--space", &path3, "--a", "0", "--b", "1", "--emit", path_str(&ef)]);
    std::fs::write(&script, "[0]").unwrap();
    let v = ok(&["ef", "replay", "--space", &path3, "--cert", path_str(&ef), "--script", path_str(&script)]);
    assert_eq!(v["winner"], json!("player1"));
}

#[test]
fn bad_input_exits_with_two() {
    let path3 = fixture("path3");
    assert_eq!(scott(&["rank", "--space", &path3, "--a", "0", "--b", "9"]).0, 2);
    assert_eq!(scott(&["rank", "--space", &path3, "--a", "0", "--b", "1/2"]).0, 2);
    assert_eq!(scott(&["rank", "--space", &path3, "--a", "0", "--b", "1", "--f", "geometric:2,3"]).0, 2);
    assert_eq!(scott(&["ef", "distinguish", "--space", &path3, "--a", "0", "--b", "2"]).0, 2);
    assert_eq!(scott(&["ef", "solve", "--space", &path3, "--a", "0", "--b", "1", "--alpha", "-1"]).0, 2);
    assert_eq!(scott(&["validate", "--space", "/nonexistent/space.json"]).0, 2);
    assert_eq!(scott(&["validate", "--bogus"]).0, 2);
    let (code, out, _) = scott(&["table", "--space", &path3, "--p", "0"]);
    assert_eq!((code, out), (2, Value::Null));
}

#[test]
fn output_does_not_depend_on_jobs() {
    let line = fixture("line");
    let args = ["table", "--space", &line, "--p", "2"];
    let one = ok(&[&["--jobs", "1"][..], &args].concat());
    let four = ok(&[&["--jobs", "4"][..], &args].concat());
    assert_eq!(one, four);
    let out = Command::new(env!("CARGO_BIN_EXE_scott"))
        .args(args)
        .env("SCOTT_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(serde_json::from_slice::<Value>(&out.stdout).unwrap(), one);
}
