#![allow(dead_code)]

pub mod radial_oracle;

use std::process::Command;

/// Runs the `kahler` binary; returns the exit code and stdout.
pub fn kahler(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kahler")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

pub fn kahler_json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, stdout, stderr) = kahler(&full);
    let value = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("bad json ({e}): {stdout}{stderr}"));
    (code, value)
}
