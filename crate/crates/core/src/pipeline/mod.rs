//! Three-stage orchestration: region detection, per-view annotation
//! detection, and text reading, merged into a [`UnifiedDrawing`].
//!
//! Inference sits behind three ports. [`replay::ReplayManifest`] implements
//! all of them from recorded outputs.

mod config;
pub mod replay;

use std::sync::Mutex;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::annoparse::{self, parse_annotation};
use crate::geometry::{self, AxisAlignedBox, Geometry, OrientedBox, Point, ScoredBox};
use crate::ingest::PairKind;
use crate::schema::{
    self, AnnotationClass, AnnotationRecord, ImageSize, RegionClass, TitleBlockFields,
    UnifiedDrawing, ViewRecord,
};

pub use config::{ConfigError, PipelineConfig, ReaderRole};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct BackendError(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawingRef {
    pub drawing_id: String,
    pub source_path: String,
    pub size: ImageSize,
}

/// A view crop in drawing coordinates; `origin` is its top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CropRef {
    pub drawing_id: String,
    pub view_id: String,
    pub bbox: AxisAlignedBox,
    pub origin: Point,
}

/// A patch handed to a text reader. `key` is `title_block-N`, `notes-N`
/// or `view-N/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchRef {
    pub drawing_id: String,
    pub key: String,
    pub kind: PairKind,
    pub bbox: AxisAlignedBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionDetection {
    pub class: RegionClass,
    pub bbox: AxisAlignedBox,
    pub confidence: f64,
}

/// `obb` is view-local when returned by a detector and global afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotationDetection {
    pub class: AnnotationClass,
    pub obb: OrientedBox,
    pub confidence: f64,
}

pub trait RegionDetector: Send + Sync {
    fn detect_regions(&self, drawing: &DrawingRef) -> Result<Vec<RegionDetection>, BackendError>;

    /// False when calls must not overlap; the orchestrator then serializes them.
    fn concurrent(&self) -> bool {
        true
    }
}

pub trait AnnotationDetector: Send + Sync {
    fn detect_annotations(&self, crop: &CropRef) -> Result<Vec<AnnotationDetection>, BackendError>;

    fn concurrent(&self) -> bool {
        true
    }
}

pub trait TextReader: Send + Sync {
    fn role(&self) -> ReaderRole;

    fn read(&self, patch: &PatchRef) -> Result<String, BackendError>;

    fn concurrent(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy)]
pub struct Ports<'a> {
    pub regions: &'a dyn RegionDetector,
    pub annotations: &'a dyn AnnotationDetector,
    pub alphabetical: &'a dyn TextReader,
    pub numerical: &'a dyn TextReader,
}

impl<'a> Ports<'a> {
    fn reader(&self, role: ReaderRole) -> &'a dyn TextReader {
        match role {
            ReaderRole::Alphabetical => self.alphabetical,
            ReaderRole::Numerical => self.numerical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("{drawing_id}: stage 1: {source}")]
    Stage1 {
        drawing_id: String,
        #[source]
        source: BackendError,
    },
    #[error("{drawing_id}/{view_id}: stage 2: {source}")]
    Stage2 {
        drawing_id: String,
        view_id: String,
        #[source]
        source: BackendError,
    },
    #[error("{drawing_id}: box does not overlap the image")]
    NoOverlap { drawing_id: String },
    #[error("{drawing_id}: output failed validation: {violations}")]
    Invalid {
        drawing_id: String,
        violations: String,
    },
}

fn image_box(size: ImageSize) -> AxisAlignedBox {
    AxisAlignedBox::new(0.0, 0.0, f64::from(size.width), f64::from(size.height))
        .expect("positive size")
}

fn check_confidence(c: f64) -> Result<(), BackendError> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(BackendError(format!("confidence {c} outside [0, 1]")))
    }
}

/// Confidence filter, class-wise NMS, clamping to the image, then sort by
/// class, confidence descending and reading order (y, then x).
pub fn run_stage1(
    drawing: &DrawingRef,
    detector: &dyn RegionDetector,
    cfg: &PipelineConfig,
) -> Result<Vec<RegionDetection>, PipelineError> {
    let wrap = |source| PipelineError::Stage1 {
        drawing_id: drawing.drawing_id.clone(),
        source,
    };
    let raw = detector.detect_regions(drawing).map_err(wrap)?;
    for d in &raw {
        check_confidence(d.confidence).map_err(wrap)?;
    }
    let kept: Vec<RegionDetection> = raw
        .into_iter()
        .filter(|d| d.confidence >= cfg.stage1_min_confidence)
        .collect();
    let scored: Vec<ScoredBox> = kept
        .iter()
        .map(|d| {
            ScoredBox::new(d.class.index() as u32, Geometry::Axis(d.bbox), d.confidence)
                .expect("checked")
        })
        .collect();
    let image = image_box(drawing.size);
    let mut out: Vec<RegionDetection> = geometry::nms_indices(&scored, cfg.nms_iou_threshold)
        .into_iter()
        .filter_map(|i| {
            let bbox = kept[i].bbox.intersect(&image)?;
            (bbox.area() > 0.0).then_some(RegionDetection { bbox, ..kept[i] })
        })
        .collect();
    out.sort_by(|a, b| {
        a.class
            .cmp(&b.class)
            .then(b.confidence.total_cmp(&a.confidence))
            .then(reading_order(&a.bbox, &b.bbox))
    });
    Ok(out)
}

fn reading_order(a: &AxisAlignedBox, b: &AxisAlignedBox) -> std::cmp::Ordering {
    a.y_min()
        .total_cmp(&b.y_min())
        .then(a.x_min().total_cmp(&b.x_min()))
        .then(a.y_max().total_cmp(&b.y_max()))
        .then(a.x_max().total_cmp(&b.x_max()))
}

/// Pads `bbox`, clamps to the image and returns the crop with its origin.
pub fn crop_region(
    size: ImageSize,
    bbox: &AxisAlignedBox,
    padding: f64,
) -> Option<(AxisAlignedBox, Point)> {
    let image = image_box(size);
    bbox.intersect(&image).filter(|b| b.area() > 0.0)?;
    let crop = bbox.expand(padding).intersect(&image)?;
    Some((crop, Point::new(crop.x_min(), crop.y_min())))
}

/// Per-view detection in the crop frame, then remapped to drawing
/// coordinates. Detections whose center leaves the view box (plus the
/// smaller of padding and the schema slack) are dropped. Output is sorted
/// by center reading order.
pub fn run_stage2_view(
    drawing: &DrawingRef,
    view_id: &str,
    view_bbox: &AxisAlignedBox,
    detector: &dyn AnnotationDetector,
    cfg: &PipelineConfig,
) -> Result<Vec<AnnotationDetection>, PipelineError> {
    let wrap = |source| PipelineError::Stage2 {
        drawing_id: drawing.drawing_id.clone(),
        view_id: view_id.to_string(),
        source,
    };
    let (crop, origin) =
        crop_region(drawing.size, view_bbox, cfg.crop_padding).ok_or_else(|| {
            PipelineError::NoOverlap {
                drawing_id: drawing.drawing_id.clone(),
            }
        })?;
    let crop_ref = CropRef {
        drawing_id: drawing.drawing_id.clone(),
        view_id: view_id.to_string(),
        bbox: crop,
        origin,
    };
    let raw = detector.detect_annotations(&crop_ref).map_err(wrap)?;
    for d in &raw {
        check_confidence(d.confidence).map_err(wrap)?;
    }
    let kept: Vec<AnnotationDetection> = raw
        .into_iter()
        .filter(|d| d.confidence >= cfg.stage2_min_confidence)
        .collect();
    let scored: Vec<ScoredBox> = kept
        .iter()
        .map(|d| {
            ScoredBox::new(
                d.class.index() as u32,
                Geometry::Oriented(d.obb),
                d.confidence,
            )
            .expect("checked")
        })
        .collect();
    let bound = view_bbox.expand(cfg.crop_padding.min(schema::VIEW_CONTAINMENT_SLACK));
    let mut out: Vec<AnnotationDetection> = geometry::nms_indices(&scored, cfg.nms_iou_threshold)
        .into_iter()
        .map(|i| AnnotationDetection {
            obb: geometry::remap_to_global(&kept[i].obb, origin).quantized(),
            ..kept[i]
        })
        .filter(|d| bound.contains(d.obb.center()))
        .collect();
    out.sort_by(|a, b| {
        a.obb
            .cy()
            .total_cmp(&b.obb.cy())
            .then(a.obb.cx().total_cmp(&b.obb.cx()))
            .then(a.class.cmp(&b.class))
            .then(b.confidence.total_cmp(&a.confidence))
    });
    Ok(out)
}

/// Splits title-block reader output into (key, value) pairs. Accepts a JSON
/// object or `key: value` lines; anything else is kept whole under
/// `unparsed_text`.
pub fn title_block_pairs(text: &str) -> Vec<(String, String)> {
    if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(text) {
        return map
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, v)
            })
            .collect();
    }
    let mut pairs = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match line.split_once(':') {
            Some((k, v)) if !k.trim().is_empty() => {
                pairs.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => return vec![("unparsed_text".into(), text.to_string())],
        }
    }
    pairs
}

/// Serializes calls into ports that declared themselves single-use.
struct Gate<'a> {
    ports: Ports<'a>,
    regions: Option<Mutex<()>>,
    annotations: Option<Mutex<()>>,
    alphabetical: Option<Mutex<()>>,
    numerical: Option<Mutex<()>>,
}

fn gate(concurrent: bool) -> Option<Mutex<()>> {
    (!concurrent).then(|| Mutex::new(()))
}

fn guarded<T>(lock: &Option<Mutex<()>>, f: impl FnOnce() -> T) -> T {
    let _g = lock
        .as_ref()
        .map(|m| m.lock().unwrap_or_else(|e| e.into_inner()));
    f()
}

impl<'a> Gate<'a> {
    fn new(ports: Ports<'a>) -> Self {
        Self {
            regions: gate(ports.regions.concurrent()),
            annotations: gate(ports.annotations.concurrent()),
            alphabetical: gate(ports.alphabetical.concurrent()),
            numerical: gate(ports.numerical.concurrent()),
            ports,
        }
    }
}

struct GatedRegions<'g, 'a>(&'g Gate<'a>);
struct GatedAnnotations<'g, 'a>(&'g Gate<'a>);

impl RegionDetector for GatedRegions<'_, '_> {
    fn detect_regions(&self, d: &DrawingRef) -> Result<Vec<RegionDetection>, BackendError> {
        guarded(&self.0.regions, || self.0.ports.regions.detect_regions(d))
    }
}

impl AnnotationDetector for GatedAnnotations<'_, '_> {
    fn detect_annotations(&self, c: &CropRef) -> Result<Vec<AnnotationDetection>, BackendError> {
        guarded(&self.0.annotations, || {
            self.0.ports.annotations.detect_annotations(c)
        })
    }
}

impl Gate<'_> {
    fn read(&self, role: ReaderRole, patch: &PatchRef) -> Result<String, BackendError> {
        let lock = match role {
            ReaderRole::Alphabetical => &self.alphabetical,
            ReaderRole::Numerical => &self.numerical,
        };
        guarded(lock, || self.ports.reader(role).read(patch))
    }
}

fn error_entry(stage: u8, key: &str, message: &str) -> Value {
    json!({"stage": stage, "key": key, "message": message})
}

/// Stage 3 for the text regions: title blocks fill fields in reading order
/// (earlier blocks win), notes append one entry each.
fn read_text_regions(
    gate: &Gate,
    drawing: &DrawingRef,
    regions: &[RegionDetection],
    cfg: &PipelineConfig,
    doc: &mut UnifiedDrawing,
    errors: &mut Vec<Value>,
) {
    for (class, kind, prefix) in [
        (RegionClass::TitleBlock, PairKind::TitleBlock, "title_block"),
        (RegionClass::Notes, PairKind::Notes, "notes"),
    ] {
        let mut boxes: Vec<AxisAlignedBox> = regions
            .iter()
            .filter(|r| r.class == class)
            .map(|r| r.bbox)
            .collect();
        boxes.sort_by(reading_order);
        for (n, bbox) in boxes.iter().enumerate() {
            let key = format!("{prefix}-{}", n + 1);
            let Some((patch, _)) = crop_region(drawing.size, bbox, cfg.crop_padding) else {
                continue;
            };
            let patch = PatchRef {
                drawing_id: drawing.drawing_id.clone(),
                key: key.clone(),
                kind,
                bbox: patch,
            };
            match gate.read(cfg.role_for(kind), &patch) {
                Ok(text) => {
                    let text = annoparse::nfc(&text);
                    match kind {
                        PairKind::TitleBlock => fill_title_block(&mut doc.title_block, &text),
                        _ => doc.notes.push(text),
                    }
                }
                Err(e) => errors.push(error_entry(3, &key, &e.0)),
            }
        }
    }
}

fn fill_title_block(tb: &mut TitleBlockFields, text: &str) {
    for (k, v) in title_block_pairs(text) {
        tb.insert(&k, &v, false);
    }
}

/// Reads and parses one annotation patch. Reader failures and grammar
/// rejections are recorded on the record itself.
fn read_annotation(
    gate: &Gate,
    drawing: &DrawingRef,
    key: &str,
    det: &AnnotationDetection,
    cfg: &PipelineConfig,
) -> AnnotationRecord {
    let kind = match det.class {
        AnnotationClass::Measure => PairKind::Measure,
        AnnotationClass::Gdt => PairKind::Gdt,
        AnnotationClass::Roughness => PairKind::Roughness,
    };
    let mut rec = AnnotationRecord {
        class: det.class,
        obb: det.obb,
        confidence: det.confidence,
        raw_text: String::new(),
        parsed: None,
        parse_error: None,
        extra: Default::default(),
    };
    let bbox = geometry::enclosing_aabb(&det.obb);
    let Some((patch, _)) = crop_region(drawing.size, &bbox, cfg.crop_padding) else {
        rec.parse_error = Some("reader failure: patch lies outside the image".into());
        return rec;
    };
    let patch = PatchRef {
        drawing_id: drawing.drawing_id.clone(),
        key: key.to_string(),
        kind,
        bbox: patch,
    };
    match gate.read(cfg.role_for(kind), &patch) {
        Ok(text) => {
            rec.raw_text = annoparse::nfc(&text);
            match parse_annotation(det.class, &rec.raw_text) {
                Ok(p) => rec.parsed = Some(p),
                Err(e) => rec.parse_error = Some(e.source.to_string()),
            }
        }
        Err(e) => rec.parse_error = Some(format!("reader failure: {}", e.0)),
    }
    rec
}

fn run_gated(
    drawing: &DrawingRef,
    gate: &Gate,
    cfg: &PipelineConfig,
) -> Result<UnifiedDrawing, PipelineError> {
    let regions = run_stage1(drawing, &GatedRegions(gate), cfg)?;
    let mut doc = UnifiedDrawing::empty(&drawing.drawing_id, &drawing.source_path, drawing.size);
    let mut errors = Vec::new();

    let mut views: Vec<AxisAlignedBox> = regions
        .iter()
        .filter(|r| r.class == RegionClass::View)
        .map(|r| r.bbox)
        .collect();
    views.sort_by(reading_order);
    for (n, bbox) in views.iter().enumerate() {
        let view_id = format!("view-{}", n + 1);
        let dets = match run_stage2_view(drawing, &view_id, bbox, &GatedAnnotations(gate), cfg) {
            Ok(d) => d,
            Err(e) => {
                let msg = match &e {
                    PipelineError::Stage2 { source, .. } => source.0.clone(),
                    other => other.to_string(),
                };
                errors.push(error_entry(2, &view_id, &msg));
                Vec::new()
            }
        };
        let annotations = dets
            .iter()
            .enumerate()
            .map(|(m, d)| read_annotation(gate, drawing, &format!("{view_id}/{}", m + 1), d, cfg))
            .collect();
        doc.views.push(ViewRecord {
            view_id,
            bbox: *bbox,
            annotations,
            extra: Default::default(),
        });
    }

    read_text_regions(gate, drawing, &regions, cfg, &mut doc, &mut errors);
    if !errors.is_empty() {
        doc.extra.insert("errors".into(), Value::Array(errors));
    }

    let violations = schema::validate(&doc);
    if !violations.is_empty() {
        return Err(PipelineError::Invalid {
            drawing_id: drawing.drawing_id.clone(),
            violations: violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        });
    }
    Ok(doc)
}

/// Runs all three stages on one drawing. A stage-1 failure aborts; later
/// failures are recorded per item (annotation `parse_error`, or the
/// top-level `extra.errors` list for views and text regions).
pub fn run_pipeline(
    drawing: &DrawingRef,
    ports: Ports,
    cfg: &PipelineConfig,
) -> Result<UnifiedDrawing, PipelineError> {
    run_gated(drawing, &Gate::new(ports), cfg)
}

/// Processes drawings on a pool of `workers` threads. Results come back in
/// input order and do not depend on the worker count.
pub fn run_batch(
    drawings: &[DrawingRef],
    ports: Ports,
    cfg: &PipelineConfig,
    workers: usize,
) -> Vec<Result<UnifiedDrawing, PipelineError>> {
    let gate = Gate::new(ports);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        drawings
            .par_iter()
            .map(|d| run_gated(d, &gate, cfg))
            .collect()
    })
}
