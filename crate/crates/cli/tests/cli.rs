use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ovalforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovalforge")).args(args).env_remove("OVALFORGE_JOBS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn oval_verify_exit_codes() {
    let good = ovalforge(&["oval", "verify", "--q", "8", "--poly", "x^2"]);
    assert_eq!(code(&good), 0);
    assert_eq!(json(&good)["valid"], true);
    let bad = ovalforge(&["oval", "verify", "--q", "8", "--poly", "x^3"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(json(&bad)["valid"], false);
    assert_eq!(code(&ovalforge(&["oval", "verify", "--q", "8", "--bogus"])), 2);
    assert_eq!(code(&ovalforge(&["oval", "verify", "--q", "12", "--poly", "x^2"])), 2);
    assert_eq!(code(&ovalforge(&["oval", "verify", "--q", "8", "--poly", "x^^2"])), 2);
    assert_eq!(code(&ovalforge(&["nonsense"])), 2);
}

#[test]
fn named_family_and_inverse() {
    let out = ovalforge(&["oval", "inverse", "--q", "8", "--poly", "x^2"]);
    assert_eq!(json(&out)["expr"], "x^4");
    let out = ovalforge(&["oval", "points", "--q", "16", "--family", "subiaco1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["oval"]["points"].as_array().unwrap().len(), 17);
}

#[test]
fn classify_q4_has_one_class() {
    let out = ovalforge(&["classify", "--q", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["census"]["classes"].as_array().unwrap().len(), 1);
    assert_eq!(v["ovals"][0]["anchors"][0]["classes"], 1);
    assert_eq!(v["ovals"][0]["anchors"][0]["spreads"], 24);
}

#[test]
fn clan_verify_reports_the_herd() {
    let out = ovalforge(&["clan", "verify", "--q", "8", "--family", "classical"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["herd"], "q+1 copies of conic");
    let sw = ovalforge(&["clan", "swap", "--q", "16", "--family", "subiaco"]);
    assert_eq!(json(&sw)["valid"], true);
}

#[test]
fn output_is_deterministic_and_out_flag_writes() {
    let args = ["classify", "--q", "8", "--stage", "census"];
    let a = ovalforge(&args);
    let b = ovalforge(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("census.json");
    let c = ovalforge(&["--out", path_str(&file), "classify", "--q", "8", "--stage", "census"]);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), a.stdout);
}

#[test]
fn resume_reuses_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let first = ovalforge(&["classify", "--q", "8", "--resume", path_str(&state)]);
    assert_eq!(code(&first), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&state).unwrap()).unwrap();
    assert_eq!(saved["q"], 8);
    assert_eq!(saved["units"].as_object().unwrap().len(), 3);
    let again = ovalforge(&["classify", "--q", "8", "--resume", path_str(&state)]);
    assert_eq!(first.stdout, again.stdout);
    let wrong = ovalforge(&["classify", "--q", "4", "--resume", path_str(&state)]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn jobs_flag_and_environment() {
    let env = Command::new(env!("CARGO_BIN_EXE_ovalforge"))
        .args(["field", "info", "--q", "16"])
        .env("OVALFORGE_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(json(&env)["q"], 16);
    assert_eq!(code(&ovalforge(&["--jobs", "0", "field", "info", "--q", "16"])), 2);
    assert_eq!(code(&ovalforge(&["--jobs", "3", "field", "info", "--q", "16"])), 0);
}

#[test]
fn spread_and_fan_records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fan = dir.path().join("fan.json");
    let spread = dir.path().join("spread.json");
    let out = ovalforge(&["--out", path_str(&fan), "fan", "from-clan", "--q", "8", "--family", "classical"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&ovalforge(&["fan", "verify", "--input", path_str(&fan)])), 0);
    let out = ovalforge(&["--out", path_str(&spread), "fan", "to-spread", "--input", path_str(&fan)]);
    assert_eq!(code(&out), 0);
    let v = ovalforge(&["spread", "verify", "--input", path_str(&spread)]);
    assert_eq!(code(&v), 0);
    assert_eq!(json(&v)["lines"], 65);
    let slice = ovalforge(&["spread", "slice", "--input", path_str(&spread)]);
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&fan).unwrap()).unwrap();
    assert_eq!(json(&slice), original);
    assert_eq!(code(&ovalforge(&["spread", "swap", "--input", path_str(&spread)])), 0);

    let mut rec: Value = serde_json::from_str(&std::fs::read_to_string(&spread).unwrap()).unwrap();
    rec["lines"].as_array_mut().unwrap().pop();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, rec.to_string()).unwrap();
    let v = ovalforge(&["spread", "verify", "--input", path_str(&broken)]);
    assert_eq!(code(&v), 1);
    assert_eq!(json(&v)["defect"]["kind"], "uncovered");
}

#[test]
fn spread_enumeration_summary() {
    let out = ovalforge(&["spread", "enumerate", "--q", "4", "--poly", "x^2", "--summary"]);
    let v = json(&out);
    assert_eq!(v["spreads"], 24);
    assert_eq!(v["classes"], 1);
    let out = ovalforge(&["spread", "enumerate", "--q", "4", "--poly", "x^2", "--limit", "2"]);
    assert_eq!(json(&out)["records"].as_array().unwrap().len(), 2);
}

#[test]
fn stabilizer_report() {
    let v = json(&ovalforge(&["stabilizer", "--q", "8", "--poly", "x^4"]));
    assert_eq!(v["orbit_lengths"], serde_json::json!([1, 8]));
    let v = json(&ovalforge(&["stabilizer", "--q", "4", "--poly", "x^2", "--hyperoval"]));
    assert_eq!(v["group_order"], 720);
    assert_eq!(v["orbit_lengths"], serde_json::json!([6]));
}

#[test]
fn magic_subcommands() {
    let v = json(&ovalforge(&["magic", "apply", "--q", "8", "--poly", "x^2", "--psi", "1,0,0,1,1"]));
    assert_eq!(v["expr"], "x^2");
    let a = ovalforge(&["--seed", "9", "magic", "check", "--q", "8", "--poly", "x^6", "--samples", "20"]);
    assert_eq!(code(&a), 0);
    assert_eq!(json(&a)["failures"], 0);
    let v = json(&ovalforge(&["magic", "equivalent", "--q", "8", "--poly", "x^2", "--to", "x^4"]));
    assert_eq!(v["equivalent"], false);
    assert_eq!(code(&ovalforge(&["magic", "apply", "--q", "8", "--poly", "x^2", "--psi", "0,0,0,0,0"])), 2);
}

#[test]
fn reproduce_desk_and_tampered_manifest() {
    let out = ovalforge(&["reproduce"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["passed"], v["total"]);

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(
        &m,
        r#"{"name": "t", "items": [
            {"id": "ok", "args": ["field", "info", "--q", "4"], "expect": [{"pointer": "/q", "value": 4}]},
            {"id": "tampered", "args": ["classify", "--q", "4", "--stage", "census"], "expect": [{"pointer": "/census/classes", "len": 2}]}
        ]}"#,
    )
    .unwrap();
    let out = ovalforge(&["reproduce", "--manifest", path_str(&m)]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["items"][0]["pass"], true);
    assert_eq!(v["items"][1]["pass"], false);
}
