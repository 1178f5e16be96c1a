//! Helpers for driving the `codeprompt` binary.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn codeprompt<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_codeprompt"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// CLI name of a fixture directory's task.
pub fn task_flag(dir: &str) -> &'static str {
    match dir {
        "api" => "api-rec",
        "translation" => "translation",
        "summarization" => "summarization",
        other => panic!("no fixture task {other}"),
    }
}

pub fn read_json(path: impl AsRef<Path>) -> Value {
    let text =
        std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()));
    serde_json::from_str(&text).unwrap()
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Vec<Value> {
    std::fs::read_to_string(path.as_ref())
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Per-sample values of `metric` averaged over runs, keyed by sample id.
pub fn per_sample(records: &[Value], metric: &str) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r["metric"] == metric) {
        let e = acc
            .entry(r["sample_id"].as_str().unwrap().to_string())
            .or_default();
        e.0 += r["value"].as_f64().unwrap();
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// Header cells of the first markdown table after `heading`.
pub fn markdown_header(doc: &str, heading: &str) -> Vec<String> {
    let after = &doc[doc
        .find(heading)
        .unwrap_or_else(|| panic!("no heading {heading:?} in\n{doc}"))..];
    let line = after.lines().find(|l| l.starts_with('|')).expect("table");
    line.trim_matches('|')
        .split('|')
        .map(|c| c.trim().to_string())
        .collect()
}
