use std::path::Path;

use edraw_core::ingest::{compute_stats, split_dataset, IngestError, SplitSpec};
use serde_json::json;

use crate::output::{emit, read_text, report_bytes, Failure};

pub fn stats(input: &Path, out: Option<&Path>, stamp: bool) -> Result<(), Failure> {
    let stats = compute_stats(input).map_err(|e| match e {
        IngestError::Io { path, source } => Failure::io(&path, source),
        other => Failure::domain(other),
    })?;
    emit(out, &report_bytes(stats.to_value(), stamp))
}

pub fn split(
    input: &Path,
    ratios: Vec<f64>,
    seed: u64,
    out: Option<&Path>,
    stamp: bool,
) -> Result<(), Failure> {
    let text = read_text(input)?;
    let ids: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let spec = SplitSpec::new(ratios, seed).map_err(Failure::usage)?;
    let parts = split_dataset(&ids, &spec)
        .map_err(|e| Failure::domain(format!("{}: {e}", input.display())))?;
    let report = json!({"seed": seed, "ratios": spec.ratios(), "parts": parts});
    emit(out, &report_bytes(report, stamp))
}
