//! Detection matching, confusion matrices and extraction metrics.
//!
//! Precision, recall, F1 and hallucination rate follow the count-based
//! definitions below; "overall" rows are unweighted (macro) means of the
//! per-class rows, with F1 averaged directly rather than recomputed.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::geometry::{self, Geometry};
use crate::schema::{AnnotationClass, RegionClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("IoU threshold {0} outside (0, 1]")]
    Threshold(String),
    #[error("mixed taxonomies: {0} does not belong to the {1} classes")]
    MixedTaxonomies(String, &'static str),
    #[error("macro aggregation needs at least one class")]
    EmptyAggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IouKind {
    AxisAligned,
    Oriented,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    iou_threshold: f64,
    pub iou_kind: IouKind,
}

impl MatchConfig {
    pub fn new(iou_threshold: f64, iou_kind: IouKind) -> Result<Self, EvalError> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(EvalError::Threshold(iou_threshold.to_string()));
        }
        Ok(Self {
            iou_threshold,
            iou_kind,
        })
    }

    pub fn iou_threshold(&self) -> f64 {
        self.iou_threshold
    }

    fn iou(&self, a: &Geometry, b: &Geometry) -> f64 {
        match self.iou_kind {
            IouKind::AxisAligned => geometry::aabb_iou(&a.bounding_box(), &b.bounding_box()),
            IouKind::Oriented => geometry::iou(a, b),
        }
    }

    fn to_value(self) -> Value {
        json!({"iou_threshold": self.iou_threshold, "iou_kind": self.iou_kind})
    }
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            iou_kind: IouKind::AxisAligned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Taxonomy {
    Region,
    Annotation,
}

impl Taxonomy {
    pub fn name(self) -> &'static str {
        match self {
            Taxonomy::Region => "region",
            Taxonomy::Annotation => "annotation",
        }
    }

    pub fn class_names(self) -> [&'static str; 3] {
        match self {
            Taxonomy::Region => RegionClass::ALL.map(RegionClass::as_str),
            Taxonomy::Annotation => AnnotationClass::ALL.map(AnnotationClass::as_str),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Region(RegionClass),
    Annotation(AnnotationClass),
}

impl ClassLabel {
    pub fn taxonomy(self) -> Taxonomy {
        match self {
            ClassLabel::Region(_) => Taxonomy::Region,
            ClassLabel::Annotation(_) => Taxonomy::Annotation,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Region(c) => c.index(),
            ClassLabel::Annotation(c) => c.index(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Region(c) => c.as_str(),
            ClassLabel::Annotation(c) => c.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub class: ClassLabel,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: ClassLabel,
    pub geometry: Geometry,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    pub fn merge(&mut self, other: &ClassCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f1_score")]
    pub f1: f64,
    pub hallucination: f64,
}

/// One entry of the match list. `pred`/`gt` index the inputs; a missing side
/// is background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub pred: Option<usize>,
    pub gt: Option<usize>,
    /// Class index of the prediction within the taxonomy.
    pub pred_class: Option<usize>,
    pub true_class: Option<usize>,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub taxonomy: Taxonomy,
    pub counts: [ClassCounts; 3],
    pub pairs: Vec<MatchPair>,
}

impl MatchResult {
    pub fn empty(taxonomy: Taxonomy) -> Self {
        Self {
            taxonomy,
            counts: [ClassCounts::default(); 3],
            pairs: Vec::new(),
        }
    }

    /// Merges per-image results; pair indices stay image-local.
    pub fn merge(&mut self, other: MatchResult) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            a.merge(b);
        }
        self.pairs.extend(other.pairs);
    }
}

fn check_taxonomy(t: Taxonomy, c: ClassLabel) -> Result<usize, EvalError> {
    if c.taxonomy() == t {
        Ok(c.index())
    } else {
        Err(EvalError::MixedTaxonomies(c.as_str().to_string(), t.name()))
    }
}

fn confidence_order(preds: &[Prediction]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .confidence
            .total_cmp(&preds[a].confidence)
            .then(a.cmp(&b))
    });
    order
}

/// Greedy matching for one image. Predictions in descending confidence each
/// take the unmatched same-class ground truth with the highest IoU at or
/// above the threshold. Leftover predictions and ground truths of different
/// classes that overlap enough are then paired one-to-one as confusions;
/// those still count as fp and fn for their own classes.
pub fn match_detections(
    taxonomy: Taxonomy,
    preds: &[Prediction],
    gts: &[GroundTruth],
    cfg: &MatchConfig,
) -> Result<MatchResult, EvalError> {
    let pc = preds
        .iter()
        .map(|p| check_taxonomy(taxonomy, p.class))
        .collect::<Result<Vec<_>, _>>()?;
    let gc = gts
        .iter()
        .map(|g| check_taxonomy(taxonomy, g.class))
        .collect::<Result<Vec<_>, _>>()?;

    let ious: Vec<Vec<f64>> = preds
        .iter()
        .map(|p| {
            gts.iter()
                .map(|g| cfg.iou(&p.geometry, &g.geometry))
                .collect()
        })
        .collect();
    let order = confidence_order(preds);
    let mut gt_taken = vec![false; gts.len()];
    let mut pred_taken = vec![false; preds.len()];
    let mut result = MatchResult::empty(taxonomy);

    let pick = |i: usize, same_class: bool, gt_taken: &mut [bool]| -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, &taken) in gt_taken.iter().enumerate() {
            if taken || (gc[j] == pc[i]) != same_class || ious[i][j] < cfg.iou_threshold {
                continue;
            }
            if best.is_none_or(|b| ious[i][j] > ious[i][b]) {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            gt_taken[j] = true;
        }
        best
    };

    for &i in &order {
        if let Some(j) = pick(i, true, &mut gt_taken) {
            pred_taken[i] = true;
            result.counts[pc[i]].tp += 1;
            result.pairs.push(MatchPair {
                pred: Some(i),
                gt: Some(j),
                pred_class: Some(pc[i]),
                true_class: Some(gc[j]),
                iou: ious[i][j],
            });
        }
    }
    for &i in &order {
        if pred_taken[i] {
            continue;
        }
        result.counts[pc[i]].fp += 1;
        let pair = match pick(i, false, &mut gt_taken) {
            Some(j) => {
                result.counts[gc[j]].fn_ += 1;
                MatchPair {
                    pred: Some(i),
                    gt: Some(j),
                    pred_class: Some(pc[i]),
                    true_class: Some(gc[j]),
                    iou: ious[i][j],
                }
            }
            None => MatchPair {
                pred: Some(i),
                gt: None,
                pred_class: Some(pc[i]),
                true_class: None,
                iou: 0.0,
            },
        };
        result.pairs.push(pair);
    }
    for (j, taken) in gt_taken.iter().enumerate() {
        if !taken {
            result.counts[gc[j]].fn_ += 1;
            result.pairs.push(MatchPair {
                pred: None,
                gt: Some(j),
                pred_class: None,
                true_class: Some(gc[j]),
                iou: 0.0,
            });
        }
    }
    Ok(result)
}

pub fn f1_from_pr(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Hallucination is `1 - precision`, or 0 when nothing was predicted.
pub fn prf_from_counts(c: ClassCounts) -> ClassMetrics {
    let predicted = c.tp + c.fp;
    let relevant = c.tp + c.fn_;
    let precision = if predicted == 0 {
        0.0
    } else {
        c.tp as f64 / predicted as f64
    };
    let recall = if relevant == 0 {
        0.0
    } else {
        c.tp as f64 / relevant as f64
    };
    ClassMetrics {
        precision,
        recall,
        f1: f1_from_pr(precision, recall),
        hallucination: if predicted == 0 { 0.0 } else { 1.0 - precision },
    }
}

pub fn macro_aggregate(per_class: &[ClassMetrics]) -> Result<ClassMetrics, EvalError> {
    if per_class.is_empty() {
        return Err(EvalError::EmptyAggregate);
    }
    let n = per_class.len() as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / n;
    Ok(ClassMetrics {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        hallucination: mean(|m| m.hallucination),
    })
}

/// Rows are true classes then background (false positives); columns are
/// predicted classes then background (false negatives).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub normalized: Vec<Vec<f64>>,
    pub no_support: Vec<String>,
}

impl ConfusionMatrix {
    pub fn to_value(&self) -> Value {
        json!({
            "labels": self.labels,
            "counts": self.counts,
            "normalized": self.normalized,
            "no_support": self.no_support,
        })
    }
}

pub fn confusion_matrix(pairs: &[MatchPair], classes: &[&str]) -> ConfusionMatrix {
    let n = classes.len();
    let mut counts = vec![vec![0u64; n + 1]; n + 1];
    for p in pairs {
        let row = p.true_class.unwrap_or(n);
        let col = p.pred_class.unwrap_or(n);
        counts[row][col] += 1;
    }
    let mut labels: Vec<String> = classes.iter().map(|s| s.to_string()).collect();
    labels.push("background".into());
    let mut no_support = Vec::new();
    let normalized = counts
        .iter()
        .zip(&labels)
        .map(|(row, label)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                no_support.push(label.clone());
                vec![0.0; n + 1]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();
    ConfusionMatrix {
        labels,
        counts,
        normalized,
        no_support,
    }
}

pub fn canonical_field_key(key: &str) -> String {
    key.trim().to_lowercase()
}

/// NFC, whitespace collapsed and trimmed; values made only of letters and
/// spaces are also case-folded. Numbers are compared as text.
pub fn normalize_field_value(value: &str) -> String {
    let collapsed = crate::annoparse::nfc(value)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    if !collapsed.is_empty() && collapsed.chars().all(|c| c.is_alphabetic() || c == ' ') {
        collapsed.to_lowercase()
    } else {
        collapsed
    }
}

fn normalized_set<'a>(
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> BTreeSet<(String, String)> {
    pairs
        .into_iter()
        .map(|(k, v)| (canonical_field_key(k), normalize_field_value(v)))
        .collect()
}

/// Strict set comparison of normalized (key, value) pairs.
pub fn field_level_eval<'a>(
    predicted: impl IntoIterator<Item = (&'a str, &'a str)>,
    truth: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> ClassCounts {
    let p = normalized_set(predicted);
    let t = normalized_set(truth);
    let tp = p.intersection(&t).count() as u64;
    ClassCounts {
        tp,
        fp: p.len() as u64 - tp,
        fn_: t.len() as u64 - tp,
    }
}

/// A metric table: one row per class plus the macro "overall" row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<(String, ClassCounts, ClassMetrics)>,
    pub overall: ClassMetrics,
}

impl MetricTable {
    pub fn from_counts(rows: Vec<(String, ClassCounts)>) -> Result<Self, EvalError> {
        let rows: Vec<_> = rows
            .into_iter()
            .map(|(k, c)| (k, c, prf_from_counts(c)))
            .collect();
        let metrics: Vec<ClassMetrics> = rows.iter().map(|r| r.2).collect();
        let overall = macro_aggregate(&metrics)?;
        Ok(Self { rows, overall })
    }

    pub fn to_value(&self) -> Value {
        let mut per_class = Map::new();
        for (name, counts, m) in &self.rows {
            let mut v = serde_json::to_value(m).expect("metrics serialize");
            let c = serde_json::to_value(counts).expect("counts serialize");
            v.as_object_mut()
                .unwrap()
                .extend(c.as_object().unwrap().clone());
            per_class.insert(name.clone(), v);
        }
        json!({"per_class": per_class, "overall": self.overall})
    }

    fn csv_rows(&self, group: &str, out: &mut String) {
        let line = |out: &mut String, class: &str, m: &ClassMetrics, c: Option<&ClassCounts>| {
            let counts = c.map_or(",,".to_string(), |c| format!("{},{},{}", c.tp, c.fp, c.fn_));
            out.push_str(&format!(
                "{group},{class},{},{},{},{},{counts}\n",
                m.precision, m.recall, m.f1, m.hallucination
            ));
        };
        for (name, c, m) in &self.rows {
            line(out, name, m, Some(c));
        }
        line(out, "overall", &self.overall, None);
    }
}

/// `eval_report.json`: grouped metric tables, optional confusion matrix and
/// the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub groups: BTreeMap<String, MetricTable>,
    pub confusion: Option<ConfusionMatrix>,
    pub config: Value,
}

pub const CSV_HEADER: &str = "group,class,precision,recall,f1_score,hallucination,tp,fp,fn\n";

impl EvalReport {
    /// Detection report: per-class table and confusion matrix for one taxonomy.
    pub fn detection(result: &MatchResult, cfg: &MatchConfig) -> Self {
        let names = result.taxonomy.class_names();
        let rows = names
            .iter()
            .zip(result.counts)
            .map(|(n, c)| (n.to_string(), c))
            .collect();
        let table = MetricTable::from_counts(rows).expect("three classes");
        Self {
            groups: BTreeMap::from([(result.taxonomy.name().to_string(), table)]),
            confusion: Some(confusion_matrix(&result.pairs, &names)),
            config: cfg.to_value(),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut v = Map::new();
        v.insert(
            "groups".into(),
            Value::Object(
                self.groups
                    .iter()
                    .map(|(k, t)| (k.clone(), t.to_value()))
                    .collect(),
            ),
        );
        if let Some(cm) = &self.confusion {
            v.insert("confusion_matrix".into(), cm.to_value());
        }
        v.insert("config".into(), self.config.clone());
        Value::Object(v)
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.to_string();
        for (group, table) in &self.groups {
            table.csv_rows(group, &mut out);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AxisAlignedBox;

    fn aabb(x0: f64, y0: f64, x1: f64, y1: f64) -> Geometry {
        Geometry::Axis(AxisAlignedBox::new(x0, y0, x1, y1).unwrap())
    }

    fn view() -> ClassLabel {
        ClassLabel::Region(RegionClass::View)
    }

    fn pred(g: Geometry, conf: f64) -> Prediction {
        Prediction {
            class: view(),
            geometry: g,
            confidence: conf,
        }
    }

    fn gt(g: Geometry) -> GroundTruth {
        GroundTruth {
            class: view(),
            geometry: g,
        }
    }

    #[test]
    fn match_examples() {
        let cfg = MatchConfig::default();
        // IoU 60/100 = 0.6
        let r = match_detections(
            Taxonomy::Region,
            &[pred(aabb(0.0, 0.0, 10.0, 6.0), 0.9)],
            &[gt(aabb(0.0, 0.0, 10.0, 10.0))],
            &cfg,
        )
        .unwrap();
        assert_eq!(r.counts[0], ClassCounts::new(1, 0, 0));
        let r = match_detections(
            Taxonomy::Region,
            &[pred(aabb(0.0, 0.0, 10.0, 4.0), 0.9)],
            &[gt(aabb(0.0, 0.0, 10.0, 10.0))],
            &cfg,
        )
        .unwrap();
        assert_eq!(r.counts[0], ClassCounts::new(0, 1, 1));
        let preds = [
            pred(aabb(0.0, 0.0, 10.0, 8.0), 0.8),
            pred(aabb(0.0, 0.0, 10.0, 9.0), 0.9),
        ];
        let r = match_detections(
            Taxonomy::Region,
            &preds,
            &[gt(aabb(0.0, 0.0, 10.0, 10.0))],
            &cfg,
        )
        .unwrap();
        assert_eq!(r.counts[0], ClassCounts::new(1, 1, 0));
        assert_eq!(r.pairs[0].pred, Some(1));
    }

    #[test]
    fn cross_class_confusion() {
        let cfg = MatchConfig::default();
        let p = Prediction {
            class: ClassLabel::Region(RegionClass::Notes),
            geometry: aabb(0.0, 0.0, 10.0, 10.0),
            confidence: 0.7,
        };
        let r = match_detections(
            Taxonomy::Region,
            &[p],
            &[gt(aabb(0.0, 0.0, 10.0, 10.0))],
            &cfg,
        )
        .unwrap();
        assert_eq!(r.counts[0], ClassCounts::new(0, 0, 1));
        assert_eq!(r.counts[2], ClassCounts::new(0, 1, 0));
        assert_eq!(r.pairs.len(), 1);
        let cm = confusion_matrix(&r.pairs, &Taxonomy::Region.class_names());
        assert_eq!(cm.counts[0][2], 1);
        assert_eq!(cm.normalized[0][2], 1.0);
    }

    #[test]
    fn mixed_taxonomy_rejected() {
        let p = Prediction {
            class: ClassLabel::Annotation(AnnotationClass::Gdt),
            geometry: aabb(0.0, 0.0, 1.0, 1.0),
            confidence: 0.5,
        };
        let e = match_detections(Taxonomy::Region, &[p], &[], &MatchConfig::default()).unwrap_err();
        assert_eq!(e, EvalError::MixedTaxonomies("gdt".into(), "region"));
    }

    #[test]
    fn threshold_range() {
        assert!(MatchConfig::new(0.0, IouKind::Oriented).is_err());
        assert!(MatchConfig::new(1.0, IouKind::Oriented).is_ok());
        assert!(MatchConfig::new(f64::NAN, IouKind::Oriented).is_err());
    }

    #[test]
    fn prf_examples() {
        let m = prf_from_counts(ClassCounts::new(9, 1, 0));
        assert_eq!((m.precision, m.recall), (0.9, 1.0));
        let m = prf_from_counts(ClassCounts::new(0, 5, 0));
        assert_eq!((m.precision, m.hallucination), (0.0, 1.0));
        let m = prf_from_counts(ClassCounts::new(0, 0, 0));
        assert_eq!(
            (m.precision, m.recall, m.f1, m.hallucination),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn table_one_rows() {
        assert!((f1_from_pr(0.864, 0.991) - 0.923).abs() <= 0.0005);
        assert!((f1_from_pr(0.522, 0.545) - 0.533).abs() <= 0.0005);
        assert_eq!(f1_from_pr(1.0, 1.0), 1.0);
        assert_eq!(f1_from_pr(0.0, 0.0), 0.0);
    }

    #[test]
    fn macro_examples() {
        let m = |f1| ClassMetrics {
            precision: 0.0,
            recall: 0.0,
            f1,
            hallucination: 0.0,
        };
        let a = macro_aggregate(&[m(0.533), m(0.810)]).unwrap();
        assert!((a.f1 - 0.6715).abs() < 1e-12);
        let n = macro_aggregate(&[m(0.923), m(0.965), m(1.0)]).unwrap();
        assert!((n.f1 - 0.963).abs() < 0.0005);
        assert_eq!(macro_aggregate(&[m(0.4)]).unwrap(), m(0.4));
        assert_eq!(macro_aggregate(&[]), Err(EvalError::EmptyAggregate));
    }

    #[test]
    fn confusion_examples() {
        let tp = MatchPair {
            pred: Some(0),
            gt: Some(0),
            pred_class: Some(0),
            true_class: Some(0),
            iou: 1.0,
        };
        let miss = MatchPair {
            pred: None,
            gt: Some(1),
            pred_class: None,
            true_class: Some(0),
            iou: 0.0,
        };
        let cm = confusion_matrix(&[tp], &["a"]);
        assert_eq!(cm.normalized[0][0], 1.0);
        assert_eq!(cm.no_support, vec!["background".to_string()]);
        let cm = confusion_matrix(&[tp, miss], &["a", "b"]);
        assert_eq!(cm.normalized[0], vec![0.5, 0.0, 0.5]);
        assert_eq!(cm.normalized[1], vec![0.0; 3]);
        assert_eq!(
            cm.no_support,
            vec!["b".to_string(), "background".to_string()]
        );
    }

    #[test]
    fn field_examples() {
        let truth = [
            ("part_name", "Bracket"),
            ("material", "Steel"),
            ("scale", "1:2"),
            ("revision", "B"),
            ("date", "2024-01-05"),
        ];
        assert_eq!(field_level_eval(truth, truth), ClassCounts::new(5, 0, 0));
        let mut pred = truth[..4].to_vec();
        pred.push(("finish", "anodized"));
        let c = field_level_eval(pred.clone(), truth);
        assert_eq!((c.tp, c.fp), (4, 1));
        let m = prf_from_counts(ClassCounts::new(4, 1, 0));
        assert_eq!((m.precision, m.hallucination), (0.8, 0.19999999999999996));
        let c = field_level_eval([("material", "Aluminium")], [("material", "Steel")]);
        assert_eq!(c, ClassCounts::new(0, 1, 1));
    }

    #[test]
    fn value_normalization() {
        assert_eq!(
            normalize_field_value("  Stainless   Steel "),
            "stainless steel"
        );
        assert_eq!(normalize_field_value("AISI 304"), "AISI 304");
        assert_eq!(normalize_field_value("Cafe\u{301}"), "café");
        assert_eq!(canonical_field_key(" Part_Name "), "part_name");
    }

    #[test]
    fn report_shapes() {
        let r = MatchResult {
            taxonomy: Taxonomy::Annotation,
            counts: [ClassCounts::new(2, 0, 0); 3],
            pairs: Vec::new(),
        };
        let report = EvalReport::detection(&r, &MatchConfig::default());
        let v = report.to_value();
        assert_eq!(
            v["groups"]["annotation"]["per_class"]["gdt"]["f1_score"],
            json!(1.0)
        );
        assert_eq!(
            v["groups"]["annotation"]["per_class"]["gdt"]["fn"],
            json!(0)
        );
        let csv = report.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains("annotation,overall,1,1,1,0,,,\n"), "{csv}");
    }
}
