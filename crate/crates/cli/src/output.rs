use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use edraw_core::canonical::to_canonical_bytes;
use serde_json::Value;

/// A failed command: exit code plus one or more diagnostics.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub messages: Vec<String>,
}

impl Failure {
    pub fn domain(message: impl Display) -> Self {
        Self {
            code: 1,
            messages: vec![message.to_string()],
        }
    }

    pub fn io(path: &Path, err: impl Display) -> Self {
        Self {
            code: 2,
            messages: vec![format!("{}: {err}", path.display())],
        }
    }

    pub fn usage(message: impl Display) -> Self {
        Self {
            code: 2,
            messages: vec![message.to_string()],
        }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

/// Writes to `out`, or standard output when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, bytes),
        None => io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

pub fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Canonical report bytes, with `generated_at` only when asked for.
pub fn report_bytes(mut report: Value, stamp: bool) -> Vec<u8> {
    if stamp {
        if let Value::Object(m) = &mut report {
            m.insert("generated_at".into(), Value::from(unix_time()));
        }
    }
    to_canonical_bytes(&report)
}
