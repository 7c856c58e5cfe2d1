use std::fs;
use std::path::Path;

use edraw_core::pipeline::replay::ReplayManifest;
use edraw_core::pipeline::{run_batch, DrawingRef, PipelineConfig};
use edraw_core::schema::{serialize_unified, ImageSize};
use serde_json::Value;

use crate::output::{read_bytes, read_text, unix_time, write_file, Failure};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Images directly inside `dir`, sorted by file name.
fn list_drawings(dir: &Path) -> Result<Vec<DrawingRef>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let (width, height) =
                image::image_dimensions(&path).map_err(|e| Failure::io(&path, e))?;
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let name = path
                .file_name()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            Ok(DrawingRef {
                drawing_id: stem,
                source_path: name,
                size: ImageSize { width, height },
            })
        })
        .collect()
}

pub fn run(
    input: &Path,
    replay: &Path,
    config: Option<&Path>,
    out: &Path,
    workers: Option<usize>,
    stamp: bool,
) -> Result<(), Failure> {
    let manifest =
        ReplayManifest::from_json(&read_bytes(replay)?).map_err(|e| Failure::io(replay, e))?;
    let cfg = match config {
        Some(p) => PipelineConfig::from_toml(&read_text(p)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        None => PipelineConfig::default(),
    };
    let drawings = list_drawings(input)?;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let workers =
        workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let readers = manifest.readers();
    let results = run_batch(&drawings, manifest.ports(&readers), &cfg, workers);
    let mut aborted = Vec::new();
    for (drawing, result) in drawings.iter().zip(results) {
        match result {
            Ok(mut doc) => {
                if stamp {
                    doc.extra
                        .insert("generated_at".into(), Value::from(unix_time()));
                }
                let bytes = serialize_unified(&doc).map_err(Failure::domain)?;
                write_file(
                    &out.join(format!("{}.unified.json", doc.drawing_id)),
                    &bytes,
                )?;
                let annotations: usize = doc.views.iter().map(|v| v.annotations.len()).sum();
                let parse_errors = doc
                    .views
                    .iter()
                    .flat_map(|v| &v.annotations)
                    .filter(|a| a.parse_error.is_some())
                    .count();
                let errors = doc
                    .extra
                    .get("errors")
                    .and_then(Value::as_array)
                    .map_or(0, Vec::len);
                println!(
                    "{}: views={} annotations={} parse_errors={} notes={} errors={}",
                    doc.drawing_id,
                    doc.views.len(),
                    annotations,
                    parse_errors,
                    doc.notes.len(),
                    errors
                );
            }
            Err(e) => {
                println!("{}: aborted", drawing.drawing_id);
                aborted.push(e.to_string());
            }
        }
    }
    if aborted.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            messages: aborted,
        })
    }
}
