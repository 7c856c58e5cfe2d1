//! Label files, image–text pair manifests, dataset statistics and splits.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{AxisAlignedBox, OrientedBox, Point};
use crate::schema::{AnnotationClass, ImageSize, RegionClass};

/// Slack allowed when checking normalized boxes against the unit square.
pub const UNIT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelErrorKind {
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid number '{0}'")]
    InvalidNumber(String),
    #[error("class {0} out of range")]
    ClassOutOfRange(String),
    #[error("coordinate {0} outside [0, 1]")]
    CoordinateOutOfRange(String),
    #[error("box extends outside the image")]
    OutsideImage,
    #[error("degenerate box")]
    DegenerateBox,
    #[error("degenerate quadrilateral")]
    DegenerateQuad,
    #[error("non-convex quadrilateral")]
    NonConvexQuad,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct LabelError {
    pub line: usize,
    pub kind: LabelErrorKind,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Label {
        path: PathBuf,
        #[source]
        source: LabelError,
    },
    #[error("{path}: line {line}: {message}")]
    Pair {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn fields(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn parse_class(tok: &str, n: usize, line: usize) -> Result<usize, LabelError> {
    match tok.parse::<usize>() {
        Ok(c) if c < n => Ok(c),
        _ => Err(LabelError {
            line,
            kind: LabelErrorKind::ClassOutOfRange(tok.to_string()),
        }),
    }
}

fn parse_unit(tok: &str, line: usize) -> Result<f64, LabelError> {
    let v: f64 = tok.parse().map_err(|_| LabelError {
        line,
        kind: LabelErrorKind::InvalidNumber(tok.to_string()),
    })?;
    if !v.is_finite() {
        return Err(LabelError {
            line,
            kind: LabelErrorKind::InvalidNumber(tok.to_string()),
        });
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(LabelError {
            line,
            kind: LabelErrorKind::CoordinateOutOfRange(tok.to_string()),
        });
    }
    Ok(v)
}

/// Reads `class cx cy w h` lines into pixel boxes. Blank lines are skipped.
pub fn read_det_labels(
    text: &str,
    size: ImageSize,
) -> Result<Vec<(RegionClass, AxisAlignedBox)>, LabelError> {
    let (iw, ih) = (f64::from(size.width), f64::from(size.height));
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let f = fields(raw);
        if f.is_empty() {
            continue;
        }
        if f.len() != 5 {
            return Err(LabelError {
                line,
                kind: LabelErrorKind::FieldCount {
                    expected: 5,
                    found: f.len(),
                },
            });
        }
        let class = RegionClass::from_index(parse_class(f[0], 3, line)?).expect("checked");
        let v = f[1..]
            .iter()
            .map(|t| parse_unit(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        let (cx, cy, w, h) = (v[0], v[1], v[2], v[3]);
        if cx - w / 2.0 < -UNIT_SLACK
            || cy - h / 2.0 < -UNIT_SLACK
            || cx + w / 2.0 > 1.0 + UNIT_SLACK
            || cy + h / 2.0 > 1.0 + UNIT_SLACK
        {
            return Err(LabelError {
                line,
                kind: LabelErrorKind::OutsideImage,
            });
        }
        let x0 = (cx * iw - w * iw / 2.0).clamp(0.0, iw);
        let y0 = (cy * ih - h * ih / 2.0).clamp(0.0, ih);
        let x1 = (cx * iw + w * iw / 2.0).clamp(0.0, iw);
        let y1 = (cy * ih + h * ih / 2.0).clamp(0.0, ih);
        let b = AxisAlignedBox::new(x0, y0, x1, y1).map_err(|_| LabelError {
            line,
            kind: LabelErrorKind::DegenerateBox,
        })?;
        out.push((class, b));
    }
    Ok(out)
}

pub fn write_det_labels(labels: &[(RegionClass, AxisAlignedBox)], size: ImageSize) -> String {
    let (iw, ih) = (f64::from(size.width), f64::from(size.height));
    let mut s = String::new();
    for (class, b) in labels {
        let c = b.center();
        s.push_str(&format!(
            "{} {} {} {} {}\n",
            class.index(),
            c.x / iw,
            c.y / ih,
            b.width() / iw,
            b.height() / ih
        ));
    }
    s
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Minimum-area enclosing rectangle of a convex quadrilateral, found by
/// trying each edge direction. Exact when the quad is a rectangle.
pub fn fit_quad(quad: &[Point; 4]) -> Result<OrientedBox, LabelErrorKind> {
    let scale = quad
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0_f64, f64::max);
    let eps = 1e-12 * scale * scale;
    for i in 0..4 {
        for j in i + 1..4 {
            let (dx, dy) = (quad[i].x - quad[j].x, quad[i].y - quad[j].y);
            if dx * dx + dy * dy <= eps {
                return Err(LabelErrorKind::DegenerateQuad);
            }
        }
    }
    let turns: Vec<f64> = (0..4)
        .map(|i| cross(quad[i], quad[(i + 1) % 4], quad[(i + 2) % 4]))
        .collect();
    if turns.iter().any(|t| t.abs() <= eps) {
        return Err(LabelErrorKind::DegenerateQuad);
    }
    if !(turns.iter().all(|&t| t > 0.0) || turns.iter().all(|&t| t < 0.0)) {
        return Err(LabelErrorKind::NonConvexQuad);
    }

    let mut best: Option<(f64, OrientedBox)> = None;
    for i in 0..4 {
        let (a, b) = (quad[i], quad[(i + 1) % 4]);
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in quad {
            let u = p.x * ux + p.y * uy;
            let v = -p.x * uy + p.y * ux;
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        let (w, h) = (u1 - u0, v1 - v0);
        let area = w * h;
        if best.as_ref().is_some_and(|(a, _)| *a <= area) {
            continue;
        }
        let (mu, mv) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
        let cx = mu * ux - mv * uy;
        let cy = mu * uy + mv * ux;
        let obb = OrientedBox::new(cx, cy, w, h, uy.atan2(ux))
            .map_err(|_| LabelErrorKind::DegenerateQuad)?;
        best = Some((area, obb));
    }
    Ok(best.expect("four edges tried").1)
}

/// Reads `class x1 y1 x2 y2 x3 y3 x4 y4` lines; each quad is fitted in pixel
/// space so non-square images keep right angles.
pub fn read_obb_labels(
    text: &str,
    size: ImageSize,
) -> Result<Vec<(AnnotationClass, OrientedBox)>, LabelError> {
    let (iw, ih) = (f64::from(size.width), f64::from(size.height));
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let f = fields(raw);
        if f.is_empty() {
            continue;
        }
        if f.len() != 9 {
            return Err(LabelError {
                line,
                kind: LabelErrorKind::FieldCount {
                    expected: 9,
                    found: f.len(),
                },
            });
        }
        let class = AnnotationClass::from_index(parse_class(f[0], 3, line)?).expect("checked");
        let v = f[1..]
            .iter()
            .map(|t| parse_unit(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        let quad = [0, 1, 2, 3].map(|k| Point {
            x: v[2 * k] * iw,
            y: v[2 * k + 1] * ih,
        });
        let obb = fit_quad(&quad).map_err(|kind| LabelError { line, kind })?;
        out.push((class, obb));
    }
    Ok(out)
}

pub fn write_obb_labels(labels: &[(AnnotationClass, OrientedBox)], size: ImageSize) -> String {
    let (iw, ih) = (f64::from(size.width), f64::from(size.height));
    let mut s = String::new();
    for (class, b) in labels {
        s.push_str(&class.index().to_string());
        for p in b.corners() {
            s.push_str(&format!(" {} {}", p.x / iw, p.y / ih));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    TitleBlock,
    Notes,
    Measure,
    Gdt,
    Roughness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VlmPairRecord {
    pub image: String,
    pub kind: PairKind,
    pub ground_truth: String,
}

/// Reads `pairs.jsonl`; blank lines are skipped.
pub fn read_pairs(path: &Path) -> Result<Vec<VlmPairRecord>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair_err = |message: String| IngestError::Pair {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: VlmPairRecord = serde_json::from_str(line).map_err(|e| pair_err(e.to_string()))?;
        if rec.image.trim().is_empty() {
            return Err(pair_err("image path is empty".into()));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_pairs(records: &[VlmPairRecord]) -> String {
    records
        .iter()
        .map(|r| {
            let v = serde_json::to_value(r).expect("pair record serializes");
            String::from_utf8(crate::canonical::to_canonical_bytes(&v)).expect("utf-8")
        })
        .collect()
}

/// Instance counts for the six classes of both taxonomies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassHistogram {
    pub regions: [u64; 3],
    pub annotations: [u64; 3],
}

impl ClassHistogram {
    pub fn merge(&mut self, other: &ClassHistogram) {
        for i in 0..3 {
            self.regions[i] += other.regions[i];
            self.annotations[i] += other.annotations[i];
        }
    }

    pub fn total(&self) -> u64 {
        self.regions.iter().chain(&self.annotations).sum()
    }

    fn to_value(self) -> Value {
        let mut m = serde_json::Map::new();
        for c in RegionClass::ALL {
            m.insert(c.as_str().into(), json!(self.regions[c.index()]));
        }
        for c in AnnotationClass::ALL {
            m.insert(c.as_str().into(), json!(self.annotations[c.index()]));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetStats {
    pub per_drawing: BTreeMap<String, ClassHistogram>,
}

impl DatasetStats {
    /// Associative and commutative; drawings seen in both sides are summed.
    pub fn merge(mut self, other: DatasetStats) -> DatasetStats {
        for (k, h) in other.per_drawing {
            self.per_drawing.entry(k).or_default().merge(&h);
        }
        self
    }

    pub fn per_class(&self) -> ClassHistogram {
        let mut total = ClassHistogram::default();
        for h in self.per_drawing.values() {
            total.merge(h);
        }
        total
    }

    pub fn to_value(&self) -> Value {
        let pc = self.per_class();
        let regions: u64 = pc.regions.iter().sum();
        let annotations: u64 = pc.annotations.iter().sum();
        let share = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let mut region_share = serde_json::Map::new();
        for c in RegionClass::ALL {
            region_share.insert(
                c.as_str().into(),
                json!(share(pc.regions[c.index()], regions)),
            );
        }
        let mut annotation_share = serde_json::Map::new();
        for c in AnnotationClass::ALL {
            annotation_share.insert(
                c.as_str().into(),
                json!(share(pc.annotations[c.index()], annotations)),
            );
        }
        json!({
            "drawings": self.per_drawing.len(),
            "per_class": pc.to_value(),
            "per_drawing": self.per_drawing.iter().map(|(k, h)| (k.clone(), h.to_value())).collect::<serde_json::Map<_, _>>(),
            "totals": {"regions": regions, "annotations": annotations, "all": regions + annotations},
            "imbalance": {"regions": region_share, "annotations": annotation_share},
        })
    }
}

/// Counts labels in one file. Format is decided per line by field count, so
/// a file may mix both.
pub fn count_labels(text: &str) -> Result<ClassHistogram, LabelError> {
    let mut h = ClassHistogram::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let f = fields(raw);
        match f.len() {
            0 => {}
            5 => {
                let unit = ImageSize {
                    width: 1,
                    height: 1,
                };
                let (c, _) = read_det_labels(raw, unit)
                    .map_err(|e| LabelError { line, ..e })?
                    .remove(0);
                h.regions[c.index()] += 1;
            }
            9 => {
                let c = parse_class(f[0], 3, line)?;
                h.annotations[c] += 1;
            }
            n => {
                return Err(LabelError {
                    line,
                    kind: LabelErrorKind::FieldCount {
                        expected: 5,
                        found: n,
                    },
                })
            }
        }
    }
    Ok(h)
}

fn label_files(root: &Path, out: &mut Vec<PathBuf>) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io {
        path: root.to_path_buf(),
        source,
    };
    let mut entries = fs::read_dir(root)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            label_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "txt")
            && p.file_name().is_some_and(|n| n != "classes.txt")
        {
            out.push(p);
        }
    }
    Ok(())
}

/// Walks `root` for `*.txt` label files. Files sharing a stem (for example
/// `det/a.txt` and `obb/a.txt`) count toward the same drawing.
pub fn compute_stats(root: &Path) -> Result<DatasetStats, IngestError> {
    let mut files = Vec::new();
    label_files(root, &mut files)?;
    files
        .par_iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
                path: path.clone(),
                source,
            })?;
            let h = count_labels(&text).map_err(|source| IngestError::Label {
                path: path.clone(),
                source,
            })?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(DatasetStats {
                per_drawing: BTreeMap::from([(stem, h)]),
            })
        })
        .try_reduce(DatasetStats::default, |a, b| Ok(a.merge(b)))
}

/// SplitMix64 as published by Steele, Lea and Flood.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// Fisher–Yates from the last index down; `j = next_u64() % (i + 1)`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = SplitMix64::new(seed);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    ratios: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("at least two ratios required")]
    TooFewParts,
    #[error("ratio {0} must be positive and finite")]
    BadRatio(String),
    #[error("ratios sum to {0}, expected 1")]
    BadSum(String),
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
}

impl SplitSpec {
    pub fn new(ratios: Vec<f64>, seed: u64) -> Result<Self, SplitError> {
        if ratios.len() < 2 {
            return Err(SplitError::TooFewParts);
        }
        if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(SplitError::BadRatio(r.to_string()));
        }
        let sum: f64 = ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SplitError::BadSum(sum.to_string()));
        }
        Ok(Self { ratios, seed })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Part sizes: cut at `floor(cumulative_ratio * n)`, last part takes the rest.
    pub fn sizes(&self, n: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.ratios.len());
        let mut cum = 0.0;
        let mut prev = 0usize;
        for r in &self.ratios[..self.ratios.len() - 1] {
            cum += r;
            let cut = ((cum * n as f64 + 1e-9).floor() as usize).clamp(prev, n);
            sizes.push(cut - prev);
            prev = cut;
        }
        sizes.push(n - prev);
        sizes
    }
}

pub fn split_dataset<T: Clone + Eq + std::hash::Hash + ToString>(
    ids: &[T],
    spec: &SplitSpec,
) -> Result<Vec<Vec<T>>, SplitError> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id) {
            return Err(SplitError::DuplicateId(id.to_string()));
        }
    }
    let mut shuffled = ids.to_vec();
    shuffle(&mut shuffled, spec.seed);
    let mut rest = shuffled.as_slice();
    let mut parts = Vec::new();
    for size in spec.sizes(ids.len()) {
        let (head, tail) = rest.split_at(size);
        parts.push(head.to_vec());
        rest = tail;
    }
    Ok(parts)
}
