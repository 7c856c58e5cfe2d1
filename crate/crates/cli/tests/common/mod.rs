#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn edraw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edraw"))
        .args(args)
        .output()
        .expect("spawn edraw")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Compares `actual` with the golden file, rewriting it when `EDRAW_BLESS=1`.
pub fn check_golden(golden: &Path, actual: &[u8]) -> Result<(), String> {
    if std::env::var("EDRAW_BLESS").is_ok_and(|v| v == "1") {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::write(golden, actual).unwrap();
        return Ok(());
    }
    let expected = fs::read(golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from output", golden.display()))
    }
}

/// Runs the bundled replay fixture into `out` with the given worker count.
pub fn run_fixture(out: &Path, workers: usize) -> Output {
    let run = fixtures().join("run");
    edraw(&[
        "run",
        "--input",
        run.join("images").to_str().unwrap(),
        "--replay",
        run.join("replay.json").to_str().unwrap(),
        "--config",
        run.join("pipeline.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--workers",
        &workers.to_string(),
    ])
}

pub const DRAWINGS: [&str; 3] = ["bracket", "flange", "shaft"];
