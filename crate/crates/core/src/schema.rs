//! The unified per-drawing document and its canonical JSON form.
//!
//! Serialization is byte-deterministic: keys sorted, compact, reals in
//! shortest round-trip form, angles rounded to 9 significant digits, one
//! trailing newline. [`parse_unified`] accepts anything [`serialize_unified`]
//! writes and reports structural problems as a list of field paths.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;
use unicode_normalization::is_nfc;

use crate::annoparse::{self, ParsedAnnotation};
use crate::canonical::to_canonical_bytes;
use crate::geometry::{AxisAlignedBox, OrientedBox};

/// Annotation centers may sit this far outside their view box.
pub const VIEW_CONTAINMENT_SLACK: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    View,
    TitleBlock,
    Notes,
}

impl RegionClass {
    pub const ALL: [RegionClass; 3] = [Self::View, Self::TitleBlock, Self::Notes];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::View => "view",
            Self::TitleBlock => "title_block",
            Self::Notes => "notes",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationClass {
    Measure,
    Gdt,
    Roughness,
}

impl AnnotationClass {
    pub const ALL: [AnnotationClass; 3] = [Self::Measure, Self::Gdt, Self::Roughness];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Measure => "measure",
            Self::Gdt => "gdt",
            Self::Roughness => "roughness",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for AnnotationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown class '{0}'")]
pub struct UnknownClass(pub String);

impl FromStr for RegionClass {
    type Err = UnknownClass;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

impl FromStr for AnnotationClass {
    type Err = UnknownClass;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

pub const TITLE_BLOCK_KEYS: [&str; 11] = [
    "part_name",
    "drawing_number",
    "revision",
    "material",
    "scale",
    "units",
    "general_tolerance",
    "finish",
    "drawn_by",
    "date",
    "company",
];

/// Lowercases, trims and snake-cases a field label, then maps common
/// spellings onto the canonical key set.
pub fn canonical_title_key(raw: &str) -> String {
    let mut key = String::new();
    for c in raw.trim().to_lowercase().chars() {
        if c.is_alphanumeric() {
            key.push(c);
        } else if !key.ends_with('_') && !key.is_empty() {
            key.push('_');
        }
    }
    while key.ends_with('_') {
        key.pop();
    }
    let alias = match key.as_str() {
        "part" | "title" | "name" | "part_title" | "description" => "part_name",
        "drawing_no" | "dwg_no" | "dwg_number" | "drawing" | "part_number" | "part_no" => {
            "drawing_number"
        }
        "rev" => "revision",
        "mat" | "matl" => "material",
        "unit" => "units",
        "tolerance" | "tolerances" | "general_tolerances" => "general_tolerance",
        "surface_finish" => "finish",
        "drawn" | "drafter" | "author" => "drawn_by",
        _ => return key,
    };
    alias.to_string()
}

/// Title-block text fields: a fixed canonical key set plus `extra`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TitleBlockFields {
    fields: BTreeMap<String, String>,
    extra: BTreeMap<String, String>,
}

impl TitleBlockFields {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `value` under the canonical form of `key`; unknown keys go to
    /// `extra`. Existing values are kept unless `overwrite` is set.
    pub fn insert(&mut self, key: &str, value: &str, overwrite: bool) {
        let key = canonical_title_key(key);
        if key.is_empty() {
            return;
        }
        let target = if TITLE_BLOCK_KEYS.contains(&key.as_str()) {
            &mut self.fields
        } else {
            &mut self.extra
        };
        if overwrite || !target.contains_key(&key) {
            target.insert(key, annoparse::nfc(value));
        }
    }

    pub fn insert_extra(&mut self, key: &str, value: &str) {
        self.extra.insert(key.to_string(), annoparse::nfc(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .get(key)
            .or_else(|| self.extra.get(key))
            .map(String::as_str)
    }

    pub fn fields(&self) -> &BTreeMap<String, String> {
        &self.fields
    }

    pub fn extra(&self) -> &BTreeMap<String, String> {
        &self.extra
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty() && self.extra.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub class: AnnotationClass,
    pub obb: OrientedBox,
    pub confidence: f64,
    pub raw_text: String,
    pub parsed: Option<ParsedAnnotation>,
    pub parse_error: Option<String>,
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewRecord {
    pub view_id: String,
    pub bbox: AxisAlignedBox,
    pub annotations: Vec<AnnotationRecord>,
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedDrawing {
    pub drawing_id: String,
    pub source_path: String,
    pub image_size: ImageSize,
    pub title_block: TitleBlockFields,
    pub notes: Vec<String>,
    pub views: Vec<ViewRecord>,
    pub extra: BTreeMap<String, Value>,
}

impl UnifiedDrawing {
    pub fn empty(drawing_id: &str, source_path: &str, image_size: ImageSize) -> Self {
        Self {
            drawing_id: drawing_id.to_string(),
            source_path: source_path.to_string(),
            image_size,
            title_block: TitleBlockFields::new(),
            notes: Vec::new(),
            views: Vec::new(),
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub rule: &'static str,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, rule: &'static str, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.path, self.message, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("{} schema violation(s): {}", .0.len(), join_violations(.0))]
    Violations(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every document invariant. Empty means valid.
pub fn validate(d: &UnifiedDrawing) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.drawing_id.trim().is_empty() {
        out.push(Violation::new(
            "drawing_id",
            "nonempty",
            "drawing_id must be nonempty",
        ));
    }
    if d.image_size.width == 0 || d.image_size.height == 0 {
        out.push(Violation::new(
            "image_size",
            "positive",
            "image_size must be positive",
        ));
    }
    for (k, v) in d
        .title_block
        .fields
        .iter()
        .chain(d.title_block.extra.iter())
    {
        if !is_nfc(v) {
            out.push(Violation::new(
                format!("title_block.{k}"),
                "nfc",
                "text must be NFC-normalized",
            ));
        }
    }
    for k in d.title_block.extra.keys() {
        if TITLE_BLOCK_KEYS.contains(&k.as_str()) || k == "extra" {
            out.push(Violation::new(
                format!("title_block.extra.{k}"),
                "extra_key_reserved",
                "extra key shadows a canonical key",
            ));
        }
    }
    for (i, n) in d.notes.iter().enumerate() {
        if !is_nfc(n) {
            out.push(Violation::new(
                format!("notes[{i}]"),
                "nfc",
                "text must be NFC-normalized",
            ));
        }
    }
    let mut seen = HashSet::new();
    for (i, view) in d.views.iter().enumerate() {
        let vp = format!("views[{i}]");
        if view.view_id.is_empty() {
            out.push(Violation::new(
                format!("{vp}.view_id"),
                "nonempty",
                "view_id must be nonempty",
            ));
        } else if !seen.insert(view.view_id.as_str()) {
            out.push(Violation::new(
                format!("{vp}.view_id"),
                "unique_view_id",
                format!("duplicate view_id '{}'", view.view_id),
            ));
        }
        let slack = view.bbox.expand(VIEW_CONTAINMENT_SLACK);
        for (j, a) in view.annotations.iter().enumerate() {
            let ap = format!("{vp}.annotations[{j}]");
            if !(0.0..=1.0).contains(&a.confidence) {
                out.push(Violation::new(
                    format!("{ap}.confidence"),
                    "confidence_range",
                    format!("confidence {} outside [0, 1]", a.confidence),
                ));
            }
            if !slack.contains(a.obb.center()) {
                out.push(Violation::new(
                    format!("{ap}.obb"),
                    "inside_view",
                    "annotation center lies outside its view",
                ));
            }
            if !is_nfc(&a.raw_text) {
                out.push(Violation::new(
                    format!("{ap}.raw_text"),
                    "nfc",
                    "text must be NFC-normalized",
                ));
            }
            match (&a.parsed, &a.parse_error) {
                (Some(p), None) => {
                    if p.class() != a.class {
                        out.push(Violation::new(
                            format!("{ap}.parsed"),
                            "parsed_class_match",
                            format!("{} annotation carries a {} payload", a.class, p.class()),
                        ));
                    } else if annoparse::parse_annotation(a.class, &annoparse::canonical_text(p))
                        .as_ref()
                        != Ok(p)
                    {
                        out.push(Violation::new(
                            format!("{ap}.parsed"),
                            "parsed_invariants",
                            "parsed payload violates its grammar invariants",
                        ));
                    }
                }
                (None, Some(_)) => {}
                _ => out.push(Violation::new(
                    ap.clone(),
                    "parse_outcome",
                    "exactly one of parsed or parse_error must be present",
                )),
            }
        }
    }
    out
}

/// Observations that do not make a document invalid, such as an annotation
/// that also falls inside another, overlapping view.
pub fn informational_notes(d: &UnifiedDrawing) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, view) in d.views.iter().enumerate() {
        for (j, a) in view.annotations.iter().enumerate() {
            for (k, other) in d.views.iter().enumerate() {
                if k != i && other.bbox.contains(a.obb.center()) {
                    out.push(Violation::new(
                        format!("views[{i}].annotations[{j}]"),
                        "overlapping_views",
                        format!("center also lies inside view '{}'", other.view_id),
                    ));
                }
            }
        }
    }
    out
}

fn aabb_value(b: &AxisAlignedBox) -> Value {
    json!({"x_min": b.x_min(), "y_min": b.y_min(), "x_max": b.x_max(), "y_max": b.y_max()})
}

fn obb_value(b: &OrientedBox) -> Value {
    let q = b.quantized();
    json!({"cx": q.cx(), "cy": q.cy(), "w": q.w(), "h": q.h(), "theta": q.theta()})
}

fn put_extra(obj: &mut Map<String, Value>, extra: &BTreeMap<String, Value>) {
    if !extra.is_empty() {
        obj.insert(
            "extra".into(),
            Value::Object(extra.iter().map(|(k, v)| (k.clone(), v.clone())).collect()),
        );
    }
}

pub fn to_json_value(d: &UnifiedDrawing) -> Value {
    let mut tb = Map::new();
    for (k, v) in &d.title_block.fields {
        tb.insert(k.clone(), Value::String(v.clone()));
    }
    if !d.title_block.extra.is_empty() {
        tb.insert(
            "extra".into(),
            Value::Object(
                d.title_block
                    .extra
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect(),
            ),
        );
    }
    let views: Vec<Value> = d
        .views
        .iter()
        .map(|v| {
            let anns: Vec<Value> = v
                .annotations
                .iter()
                .map(|a| {
                    let mut o = Map::new();
                    o.insert("class".into(), Value::String(a.class.as_str().into()));
                    o.insert("obb".into(), obb_value(&a.obb));
                    o.insert("confidence".into(), json!(a.confidence));
                    o.insert("raw_text".into(), Value::String(a.raw_text.clone()));
                    if let Some(p) = &a.parsed {
                        o.insert(
                            "parsed".into(),
                            serde_json::to_value(p).expect("parsed payload serializes"),
                        );
                    }
                    if let Some(e) = &a.parse_error {
                        o.insert("parse_error".into(), Value::String(e.clone()));
                    }
                    put_extra(&mut o, &a.extra);
                    Value::Object(o)
                })
                .collect();
            let mut o = Map::new();
            o.insert("view_id".into(), Value::String(v.view_id.clone()));
            o.insert("bbox".into(), aabb_value(&v.bbox));
            o.insert("annotations".into(), Value::Array(anns));
            put_extra(&mut o, &v.extra);
            Value::Object(o)
        })
        .collect();
    let mut o = Map::new();
    o.insert("drawing_id".into(), Value::String(d.drawing_id.clone()));
    o.insert("source_path".into(), Value::String(d.source_path.clone()));
    o.insert(
        "image_size".into(),
        json!({"width": d.image_size.width, "height": d.image_size.height}),
    );
    o.insert("title_block".into(), Value::Object(tb));
    o.insert(
        "notes".into(),
        Value::Array(d.notes.iter().cloned().map(Value::String).collect()),
    );
    o.insert("views".into(), Value::Array(views));
    put_extra(&mut o, &d.extra);
    Value::Object(o)
}

pub fn serialize_unified(d: &UnifiedDrawing) -> Result<Vec<u8>, SchemaError> {
    let violations = validate(d);
    if !violations.is_empty() {
        return Err(SchemaError::Violations(violations));
    }
    Ok(to_canonical_bytes(&to_json_value(d)))
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1);
        }
        offset += l.len();
    }
    offset
}

pub fn parse_unified(bytes: &[u8]) -> Result<UnifiedDrawing, SchemaError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SchemaError::Syntax {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    let value: Value = serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut dec = Decoder::default();
    let doc = dec.drawing(&value);
    let mut violations = dec.violations;
    if let Some(doc) = &doc {
        violations.extend(validate(doc));
    }
    match doc {
        Some(doc) if violations.is_empty() => Ok(doc),
        _ => Err(SchemaError::Violations(violations)),
    }
}

#[derive(Default)]
struct Decoder {
    violations: Vec<Violation>,
}

impl Decoder {
    fn fail(&mut self, path: &str, rule: &'static str, message: impl Into<String>) {
        self.violations.push(Violation::new(path, rule, message));
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(o) => Some(o),
            None => {
                self.fail(path, "type", format!("{path} must be an object"));
                None
            }
        }
    }

    fn field<'v>(&mut self, o: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let p = join(path, key);
        match o.get(key) {
            Some(v) => Some(v),
            None => {
                self.fail(&p, "required", format!("{key} required"));
                None
            }
        }
    }

    fn string(&mut self, o: &Map<String, Value>, key: &str, path: &str) -> Option<String> {
        let v = self.field(o, key, path)?;
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.fail(&join(path, key), "type", format!("{key} must be a string"));
                None
            }
        }
    }

    fn number(&mut self, o: &Map<String, Value>, key: &str, path: &str) -> Option<f64> {
        let v = self.field(o, key, path)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.fail(&join(path, key), "type", format!("{key} must be a number"));
                None
            }
        }
    }

    fn array<'v>(
        &mut self,
        o: &'v Map<String, Value>,
        key: &str,
        path: &str,
    ) -> Option<&'v Vec<Value>> {
        let v = self.field(o, key, path)?;
        match v.as_array() {
            Some(a) => Some(a),
            None => {
                self.fail(&join(path, key), "type", format!("{key} must be an array"));
                None
            }
        }
    }

    /// Collects keys outside `known` plus any explicit `extra` object.
    fn extras(
        &mut self,
        o: &Map<String, Value>,
        known: &[&str],
        path: &str,
    ) -> BTreeMap<String, Value> {
        let mut extra = BTreeMap::new();
        if let Some(e) = o.get("extra") {
            if let Some(e) = self.object(e, &join(path, "extra")) {
                extra.extend(e.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
        }
        for (k, v) in o {
            if k != "extra"
                && !known.contains(&k.as_str())
                && extra.insert(k.clone(), v.clone()).is_some()
            {
                self.fail(
                    &join(path, k),
                    "duplicate_extra",
                    format!("'{k}' given twice"),
                );
            }
        }
        extra
    }

    fn drawing(&mut self, v: &Value) -> Option<UnifiedDrawing> {
        let o = self.object(v, "$")?;
        let drawing_id = self.string(o, "drawing_id", "");
        let source_path = self.string(o, "source_path", "");
        let image_size = self.image_size(o);
        let title_block = self.title_block(o);
        let notes = self.array(o, "notes", "").map(|arr| {
            arr.iter()
                .enumerate()
                .filter_map(|(i, n)| match n.as_str() {
                    Some(s) => Some(s.to_string()),
                    None => {
                        self.fail(&format!("notes[{i}]"), "type", "note must be a string");
                        None
                    }
                })
                .collect::<Vec<_>>()
        });
        let views = self.array(o, "views", "").map(|arr| {
            arr.iter()
                .enumerate()
                .filter_map(|(i, v)| self.view(v, &format!("views[{i}]")))
                .collect::<Vec<_>>()
        });
        let extra = self.extras(
            o,
            &[
                "drawing_id",
                "source_path",
                "image_size",
                "title_block",
                "notes",
                "views",
            ],
            "",
        );
        Some(UnifiedDrawing {
            drawing_id: drawing_id?,
            source_path: source_path?,
            image_size: image_size?,
            title_block: title_block?,
            notes: notes?,
            views: views?,
            extra,
        })
    }

    fn image_size(&mut self, o: &Map<String, Value>) -> Option<ImageSize> {
        let v = self.field(o, "image_size", "")?;
        let s = self.object(v, "image_size")?;
        let mut dim = |key: &str| -> Option<u32> {
            let x = self.field(s, key, "image_size")?;
            match x.as_u64().and_then(|n| u32::try_from(n).ok()) {
                Some(n) => Some(n),
                None => {
                    self.fail(
                        &join("image_size", key),
                        "type",
                        format!("{key} must be a pixel count"),
                    );
                    None
                }
            }
        };
        let width = dim("width");
        let height = dim("height");
        Some(ImageSize {
            width: width?,
            height: height?,
        })
    }

    fn title_block(&mut self, o: &Map<String, Value>) -> Option<TitleBlockFields> {
        let v = match o.get("title_block") {
            Some(v) => v,
            None => {
                self.fail("title_block", "required", "title_block required");
                return None;
            }
        };
        let tb = self.object(v, "title_block")?;
        let mut out = TitleBlockFields::new();
        let string_of = |dec: &mut Self, path: String, v: &Value| -> Option<String> {
            match v.as_str() {
                Some(s) => Some(s.to_string()),
                None => {
                    dec.fail(&path, "type", "title block values must be strings");
                    None
                }
            }
        };
        for (k, v) in tb {
            if k == "extra" {
                if let Some(e) = self.object(v, "title_block.extra") {
                    for (ek, ev) in e {
                        if let Some(s) = string_of(self, format!("title_block.extra.{ek}"), ev) {
                            out.extra.insert(ek.clone(), s);
                        }
                    }
                }
            } else if let Some(s) = string_of(self, format!("title_block.{k}"), v) {
                if TITLE_BLOCK_KEYS.contains(&k.as_str()) {
                    out.fields.insert(k.clone(), s);
                } else if out.extra.insert(k.clone(), s).is_some() {
                    self.fail(
                        &format!("title_block.{k}"),
                        "duplicate_extra",
                        format!("'{k}' given twice"),
                    );
                }
            }
        }
        Some(out)
    }

    fn aabb(&mut self, v: &Value, path: &str) -> Option<AxisAlignedBox> {
        let o = self.object(v, path)?;
        let vals: Vec<Option<f64>> = ["x_min", "y_min", "x_max", "y_max"]
            .iter()
            .map(|k| self.number(o, k, path))
            .collect();
        let [a, b, c, d] = [vals[0]?, vals[1]?, vals[2]?, vals[3]?];
        match AxisAlignedBox::new(a, b, c, d) {
            Ok(bx) => Some(bx),
            Err(e) => {
                self.fail(path, "box", e.to_string());
                None
            }
        }
    }

    fn obb(&mut self, v: &Value, path: &str) -> Option<OrientedBox> {
        let o = self.object(v, path)?;
        let vals: Vec<Option<f64>> = ["cx", "cy", "w", "h", "theta"]
            .iter()
            .map(|k| self.number(o, k, path))
            .collect();
        let [cx, cy, w, h, t] = [vals[0]?, vals[1]?, vals[2]?, vals[3]?, vals[4]?];
        match OrientedBox::new(cx, cy, w, h, t) {
            Ok(bx) => Some(bx),
            Err(e) => {
                self.fail(path, "box", e.to_string());
                None
            }
        }
    }

    fn view(&mut self, v: &Value, path: &str) -> Option<ViewRecord> {
        let o = self.object(v, path)?;
        let view_id = self.string(o, "view_id", path);
        let bbox = self
            .field(o, "bbox", path)
            .and_then(|b| self.aabb(b, &join(path, "bbox")));
        let annotations = self.array(o, "annotations", path).map(|arr| {
            arr.iter()
                .enumerate()
                .filter_map(|(j, a)| self.annotation(a, &format!("{path}.annotations[{j}]")))
                .collect::<Vec<_>>()
        });
        let extra = self.extras(o, &["view_id", "bbox", "annotations"], path);
        Some(ViewRecord {
            view_id: view_id?,
            bbox: bbox?,
            annotations: annotations?,
            extra,
        })
    }

    fn annotation(&mut self, v: &Value, path: &str) -> Option<AnnotationRecord> {
        let o = self.object(v, path)?;
        let class =
            self.string(o, "class", path)
                .and_then(|c| match c.parse::<AnnotationClass>() {
                    Ok(c) => Some(c),
                    Err(e) => {
                        self.fail(&join(path, "class"), "class", e.to_string());
                        None
                    }
                });
        let obb = self
            .field(o, "obb", path)
            .and_then(|b| self.obb(b, &join(path, "obb")));
        let confidence = self.number(o, "confidence", path);
        let raw_text = self.string(o, "raw_text", path);
        let parsed = match o.get("parsed") {
            None | Some(Value::Null) => Some(None),
            Some(p) => match ParsedAnnotation::deserialize(p) {
                Ok(p) => Some(Some(p)),
                Err(e) => {
                    self.fail(&join(path, "parsed"), "parsed_shape", e.to_string());
                    None
                }
            },
        };
        let parse_error = match o.get("parse_error") {
            None | Some(Value::Null) => Some(None),
            Some(Value::String(s)) => Some(Some(s.clone())),
            Some(_) => {
                self.fail(
                    &join(path, "parse_error"),
                    "type",
                    "parse_error must be a string",
                );
                None
            }
        };
        let extra = self.extras(
            o,
            &[
                "class",
                "obb",
                "confidence",
                "raw_text",
                "parsed",
                "parse_error",
            ],
            path,
        );
        Some(AnnotationRecord {
            class: class?,
            obb: obb?,
            confidence: confidence?,
            raw_text: raw_text?,
            parsed: parsed?,
            parse_error: parse_error?,
            extra,
        })
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}
