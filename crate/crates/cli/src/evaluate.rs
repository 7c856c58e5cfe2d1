use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use edraw_core::annoparse::nfc;
use edraw_core::eval::{
    match_detections, ClassCounts, ClassLabel, EvalReport, GroundTruth, IouKind, MatchConfig,
    MatchResult, MetricTable, Prediction, Taxonomy,
};
use edraw_core::geometry::{AxisAlignedBox, ConvexPolygon, Geometry, Point};
use edraw_core::ingest::PairKind;
use edraw_core::pipeline::title_block_pairs;
use edraw_core::{parse_annotation, AnnotationClass, RegionClass};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{emit, read_text, report_bytes, Failure};
use crate::Format;

fn write_report(
    report: &EvalReport,
    format: Format,
    out: Option<&Path>,
    stamp: bool,
) -> Result<(), Failure> {
    match format {
        Format::Json => emit(out, &report_bytes(report.to_value(), stamp)),
        Format::Csv => emit(out, report.to_csv().as_bytes()),
    }
}

/// Label files in `dir` keyed by stem; `classes.txt` is skipped.
fn label_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Failure::io(dir, e))? {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "txt")
            && path.file_name().is_some_and(|n| n != "classes.txt")
        {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            out.insert(stem, path);
        }
    }
    Ok(out)
}

/// Field count of a ground-truth line: 5 for regions, 9 for annotations.
fn taxonomy_for(fields: usize) -> Option<Taxonomy> {
    match fields {
        5 => Some(Taxonomy::Region),
        9 => Some(Taxonomy::Annotation),
        _ => None,
    }
}

fn number(tok: &str, unit: bool) -> Result<f64, String> {
    let v: f64 = tok.parse().map_err(|_| format!("invalid number '{tok}'"))?;
    if !v.is_finite() || (unit && !(0.0..=1.0).contains(&v)) {
        return Err(format!("value {tok} outside [0, 1]"));
    }
    Ok(v)
}

/// One label line in normalized coordinates. Annotation quads stay exact
/// polygons: IoU is unchanged by the per-axis scaling to pixels.
fn label(taxonomy: Taxonomy, f: &[&str]) -> Result<(ClassLabel, Geometry), String> {
    let class = f[0]
        .parse::<usize>()
        .ok()
        .filter(|c| *c < 3)
        .ok_or_else(|| format!("class {} out of range", f[0]))?;
    let v = f[1..]
        .iter()
        .map(|t| number(t, true))
        .collect::<Result<Vec<_>, _>>()?;
    match taxonomy {
        Taxonomy::Region => {
            let (cx, cy, w, h) = (v[0], v[1], v[2], v[3]);
            let b = AxisAlignedBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
                .map_err(|e| e.to_string())?;
            Ok((
                ClassLabel::Region(RegionClass::from_index(class).expect("checked")),
                Geometry::Axis(b),
            ))
        }
        Taxonomy::Annotation => {
            let quad = (0..4).map(|k| Point::new(v[2 * k], v[2 * k + 1])).collect();
            let p = ConvexPolygon::new(quad).map_err(|e| e.to_string())?;
            Ok((
                ClassLabel::Annotation(AnnotationClass::from_index(class).expect("checked")),
                Geometry::Polygon(p),
            ))
        }
    }
}

struct LabelFile {
    taxonomy: Option<Taxonomy>,
    rows: Vec<(ClassLabel, Geometry, Option<f64>)>,
}

/// Reads a label file; predictions carry one extra trailing confidence field.
fn read_labels(path: &Path, with_confidence: bool) -> Result<LabelFile, Failure> {
    let text = read_text(path)?;
    let extra = usize::from(with_confidence);
    let mut file = LabelFile {
        taxonomy: None,
        rows: Vec::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let fail = |m: String| Failure::domain(format!("{}: line {}: {m}", path.display(), i + 1));
        let t = taxonomy_for(f.len().saturating_sub(extra))
            .ok_or_else(|| fail(format!("unexpected field count {}", f.len())))?;
        if file.taxonomy.is_some_and(|prev| prev != t) {
            return Err(fail("mixed label formats in one file".into()));
        }
        file.taxonomy = Some(t);
        let body = &f[..f.len() - extra];
        let (class, geometry) = label(t, body).map_err(fail)?;
        let confidence = if with_confidence {
            Some(number(f[f.len() - 1], true).map_err(fail)?)
        } else {
            None
        };
        file.rows.push((class, geometry, confidence));
    }
    Ok(file)
}

pub fn detect(
    pred_dir: &Path,
    gt_dir: &Path,
    iou_threshold: f64,
    format: Format,
    out: Option<&Path>,
    stamp: bool,
) -> Result<(), Failure> {
    let preds = label_files(pred_dir)?;
    let gts = label_files(gt_dir)?;
    let stems: BTreeSet<&String> = preds.keys().chain(gts.keys()).collect();

    let mut files = Vec::new();
    let mut taxonomy = None;
    for stem in stems {
        let p = preds.get(stem).map(|p| read_labels(p, true)).transpose()?;
        let g = gts.get(stem).map(|p| read_labels(p, false)).transpose()?;
        for t in [&p, &g].into_iter().flatten().filter_map(|f| f.taxonomy) {
            if taxonomy.is_some_and(|prev| prev != t) {
                return Err(Failure::domain(format!(
                    "{stem}: region and annotation labels mixed"
                )));
            }
            taxonomy = Some(t);
        }
        files.push((stem.clone(), p, g));
    }
    let taxonomy = taxonomy.unwrap_or(Taxonomy::Region);
    let kind = match taxonomy {
        Taxonomy::Region => IouKind::AxisAligned,
        Taxonomy::Annotation => IouKind::Oriented,
    };
    let cfg = MatchConfig::new(iou_threshold, kind).map_err(Failure::usage)?;

    let mut total = MatchResult::empty(taxonomy);
    for (stem, p, g) in files {
        let preds: Vec<Prediction> = p
            .map_or_else(Vec::new, |f| f.rows)
            .into_iter()
            .map(|(class, geometry, c)| Prediction {
                class,
                geometry,
                confidence: c.expect("prediction confidence"),
            })
            .collect();
        let gts: Vec<GroundTruth> = g
            .map_or_else(Vec::new, |f| f.rows)
            .into_iter()
            .map(|(class, geometry, _)| GroundTruth { class, geometry })
            .collect();
        let r = match_detections(taxonomy, &preds, &gts, &cfg)
            .map_err(|e| Failure::domain(format!("{stem}: {e}")))?;
        total.merge(r);
    }
    write_report(&EvalReport::detection(&total, &cfg), format, out, stamp)
}

/// One line of an eval-parse JSONL file. Exactly one of `fields` and `text`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    id: String,
    kind: PairKind,
    fields: Option<BTreeMap<String, Value>>,
    text: Option<String>,
}

const KIND_NAMES: [(PairKind, &str, &str); 5] = [
    (PairKind::TitleBlock, "title_block", "alphabetical"),
    (PairKind::Notes, "notes", "alphabetical"),
    (PairKind::Measure, "measure", "numerical"),
    (PairKind::Gdt, "gdt", "numerical"),
    (PairKind::Roughness, "roughness", "numerical"),
];

fn annotation_class(kind: PairKind) -> Option<AnnotationClass> {
    match kind {
        PairKind::Measure => Some(AnnotationClass::Measure),
        PairKind::Gdt => Some(AnnotationClass::Gdt),
        PairKind::Roughness => Some(AnnotationClass::Roughness),
        PairKind::TitleBlock | PairKind::Notes => None,
    }
}

type FieldSet = Vec<(String, String)>;

/// Turns a record into (key, value) pairs. A prediction whose text does not
/// parse becomes a single field that can never match.
fn record_fields(rec: FieldRecord, is_truth: bool) -> Result<FieldSet, String> {
    match (rec.fields, rec.text) {
        (Some(fields), None) => Ok(fields
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, v)
            })
            .collect()),
        (None, Some(text)) => {
            let text = nfc(&text);
            match (rec.kind, annotation_class(rec.kind)) {
                (PairKind::TitleBlock, _) => Ok(title_block_pairs(&text)),
                (PairKind::Notes, _) => Ok(text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| ("note".to_string(), l.to_string()))
                    .collect()),
                (_, Some(class)) => match parse_annotation(class, &text) {
                    Ok(p) => Ok(p.to_fields().into_iter().collect()),
                    Err(e) if is_truth => Err(e.to_string()),
                    Err(_) => Ok(vec![("\u{0}unparseable".to_string(), text)]),
                },
                (_, None) => unreachable!("every other kind is an annotation"),
            }
        }
        _ => Err("exactly one of 'fields' and 'text' required".into()),
    }
}

fn read_field_records(
    path: &Path,
    is_truth: bool,
) -> Result<BTreeMap<(PairKind, String), FieldSet>, Failure> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |m: String| Failure::domain(format!("{}: line {}: {m}", path.display(), i + 1));
        let rec: FieldRecord = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        let key = (rec.kind, rec.id.clone());
        let fields = record_fields(rec, is_truth).map_err(fail)?;
        if out.insert(key.clone(), fields).is_some() {
            return Err(fail(format!("duplicate record '{}'", key.1)));
        }
    }
    Ok(out)
}

pub fn fields(
    pred: &Path,
    gt: &Path,
    format: Format,
    out: Option<&Path>,
    stamp: bool,
) -> Result<(), Failure> {
    let preds = read_field_records(pred, false)?;
    let truth = read_field_records(gt, true)?;
    let keys: BTreeSet<&(PairKind, String)> = preds.keys().chain(truth.keys()).collect();

    let mut counts: BTreeMap<PairKind, ClassCounts> = BTreeMap::new();
    for key in keys {
        let empty = FieldSet::new();
        let p = preds.get(key).unwrap_or(&empty);
        let t = truth.get(key).unwrap_or(&empty);
        let c = edraw_core::eval::field_level_eval(
            p.iter().map(|(k, v)| (k.as_str(), v.as_str())),
            t.iter().map(|(k, v)| (k.as_str(), v.as_str())),
        );
        counts.entry(key.0).or_default().merge(&c);
    }

    let mut groups = BTreeMap::new();
    for group in ["alphabetical", "numerical"] {
        let rows: Vec<(String, ClassCounts)> = KIND_NAMES
            .iter()
            .filter(|(_, _, g)| *g == group)
            .filter_map(|(kind, name, _)| counts.get(kind).map(|c| (name.to_string(), *c)))
            .collect();
        if !rows.is_empty() {
            groups.insert(
                group.to_string(),
                MetricTable::from_counts(rows).map_err(Failure::domain)?,
            );
        }
    }
    let report = EvalReport {
        groups,
        confusion: None,
        config: json!({"matching": "field_level"}),
    };
    write_report(&report, format, out, stamp)
}
