//! Manifests bind named checks to command lines and expected values.

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{run, Cli, RunArgs};
use ovalforge::Error;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    /// Arguments after the program name.
    pub args: Vec<String>,
    #[serde(default)]
    pub expect: Vec<Expect>,
    /// Expected validity of the result (false for checks that must fail).
    #[serde(default = "yes")]
    pub valid: bool,
}

fn yes() -> bool {
    true
}

/// A JSON pointer into the result and the expected value, array length or
/// lower bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Expect {
    pub pointer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    pub id: String,
    pub pass: bool,
    pub checks: Vec<String>,
}

pub fn builtin(suite: &str) -> Result<Manifest, Error> {
    let text = match suite {
        "desk" => include_str!("../manifests/desk.json"),
        "full" => include_str!("../manifests/full.json"),
        s => return Err(Error::Parse(format!("unknown suite {s:?} (desk or full)"))),
    };
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("built-in manifest: {e}")))
}

fn check(e: &Expect, result: &Value) -> (bool, String) {
    let Some(actual) = result.pointer(&e.pointer) else {
        return (false, format!("{}: missing", e.pointer));
    };
    if let Some(v) = &e.value {
        return (actual == v, format!("{}: expected {v}, got {actual}", e.pointer));
    }
    if let Some(n) = e.len {
        let got = actual.as_array().map(Vec::len);
        return (got == Some(n), format!("{}: expected length {n}, got {got:?}", e.pointer));
    }
    if let Some(m) = e.min {
        let got = actual.as_f64();
        return (got.is_some_and(|g| g >= m), format!("{}: expected at least {m}, got {actual}", e.pointer));
    }
    (false, format!("{}: no expectation given", e.pointer))
}

pub fn run_manifest(m: &Manifest, outer: &RunArgs) -> Vec<Row> {
    m.items
        .iter()
        .map(|item| {
            let argv = std::iter::once("ovalforge".to_string()).chain(item.args.iter().cloned());
            let cli = match Cli::try_parse_from(argv) {
                Ok(c) => c,
                Err(e) => return Row { id: item.id.clone(), pass: false, checks: vec![format!("usage: {e}")] },
            };
            if matches!(cli.cmd, crate::Cmd::Reproduce { .. }) {
                return Row { id: item.id.clone(), pass: false, checks: vec!["nested reproduce".into()] };
            }
            let mut cli = cli;
            cli.run.seed = outer.seed;
            match run(&cli) {
                Err(e) => Row { id: item.id.clone(), pass: false, checks: vec![format!("error: {e}")] },
                Ok(out) => {
                    let mut pass = out.valid == item.valid;
                    let mut checks = vec![format!("valid: expected {}, got {}", item.valid, out.valid)];
                    for e in &item.expect {
                        let (ok, text) = check(e, &out.value);
                        pass &= ok;
                        checks.push(format!("{} {text}", if ok { "ok" } else { "FAIL" }));
                    }
                    Row { id: item.id.clone(), pass, checks }
                }
            }
        })
        .collect()
}
