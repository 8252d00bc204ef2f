#![allow(dead_code)]

pub mod html;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/xpweek")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub const SOURCES: [&str; 5] = [
    "xpweek.status",
    "xpweek.svnlog",
    "xpweek.calls",
    "customer-contacts.jsonl",
    "meetings.jsonl",
];

/// `--team`, `--strategy` and one `--events` per fixture source.
pub fn project_args() -> Vec<String> {
    vec![
        "--team".into(),
        fixture("xpweek.team").display().to_string(),
        "--strategy".into(),
        fixture("xpweek.strategy").display().to_string(),
    ]
}

pub fn event_args() -> Vec<String> {
    SOURCES
        .iter()
        .flat_map(|s| ["--events".to_string(), fixture(s).display().to_string()])
        .collect()
}

pub fn flowkit<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowkit"))
        .args(args)
        .output()
        .expect("the flowkit binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn golden_target() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/target.dot")
}
