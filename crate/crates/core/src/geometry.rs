//! Box geometry for both detection stages.
//!
//! Layout regions are axis-aligned; fine annotations are oriented boxes.
//! Rotated IoU is computed exactly by clipping the two corner polygons
//! against each other, so every IoU in this crate is a closed-form area
//! ratio rather than a sampled estimate.
//!
//! Coordinates are image pixels with `y` growing downward. Angles are in
//! radians; a positive angle rotates the box's local `+x` axis toward `+y`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Polygons whose area falls below this are treated as empty.
pub const AREA_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("inverted axis-aligned box: ({x_min}, {y_min}) .. ({x_max}, {y_max})")]
    Inverted {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("oriented box extents must be positive, got w={w}, h={h}")]
    NonPositiveExtent { w: f64, h: f64 },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not convex")]
    NotConvex,
    #[error("polygon has no area")]
    ZeroArea,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisAlignedBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl AxisAlignedBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite("axis-aligned box"));
        }
        if x_min > x_max || y_min > y_max {
            return Err(GeometryError::Inverted {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
    pub fn center(&self) -> Point {
        Point::new(
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Grows every side by `by` (which may be negative as long as the box
    /// stays non-inverted).
    pub fn expand(&self, by: f64) -> Self {
        let cx = (self.x_min + self.x_max) / 2.0;
        let cy = (self.y_min + self.y_max) / 2.0;
        Self {
            x_min: (self.x_min - by).min(cx),
            y_min: (self.y_min - by).min(cy),
            x_max: (self.x_max + by).max(cx),
            y_max: (self.y_max + by).max(cy),
        }
    }

    /// Intersection with `other`, or `None` when they share no area.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let x_min = self.x_min.max(other.x_min);
        let y_min = self.y_min.max(other.y_min);
        let x_max = self.x_max.min(other.x_max);
        let y_max = self.y_max.min(other.y_max);
        if x_max - x_min <= 0.0 || y_max - y_min <= 0.0 {
            return None;
        }
        Some(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    pub fn to_oriented(&self) -> Option<OrientedBox> {
        let c = self.center();
        OrientedBox::new(c.x, c.y, self.width(), self.height(), 0.0).ok()
    }

    pub fn to_polygon(&self) -> Option<ConvexPolygon> {
        ConvexPolygon::new(vec![
            Point::new(self.x_min, self.y_min),
            Point::new(self.x_max, self.y_min),
            Point::new(self.x_max, self.y_max),
            Point::new(self.x_min, self.y_max),
        ])
        .ok()
    }
}

impl<'de> Deserialize<'de> for AxisAlignedBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x_min: f64,
            y_min: f64,
            x_max: f64,
            y_max: f64,
        }
        let r = Raw::deserialize(d)?;
        Self::new(r.x_min, r.y_min, r.x_max, r.y_max).map_err(serde::de::Error::custom)
    }
}

/// Folds any angle into `[-π/2, π/2)`.
pub fn fold_half_turn(theta: f64) -> f64 {
    let mut t = (theta + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if t >= FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// Rounds an angle to 9 significant digits, keeping it inside the canonical
/// range. Idempotent.
pub fn quantize_angle(theta: f64) -> f64 {
    // largest 9-digit value below pi/2
    #[allow(clippy::approx_constant)]
    const EDGE: f64 = 1.57079632;
    if theta == 0.0 {
        return 0.0;
    }
    let q: f64 = format!("{theta:.8e}").parse().unwrap_or(theta);
    if q < -FRAC_PI_2 {
        -EDGE
    } else if q >= FRAC_PI_2 {
        EDGE
    } else if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Rotated rectangle. Always stored canonically: `w >= h` and
/// `theta` in `[-π/2, π/2)`, with squares folded further into
/// `[-π/4, π/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrientedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl OrientedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self, GeometryError> {
        if ![cx, cy, w, h, theta].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite("oriented box"));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(GeometryError::NonPositiveExtent { w, h });
        }
        let (w, h, theta) = if w < h {
            (h, w, theta + FRAC_PI_2)
        } else {
            (w, h, theta)
        };
        let mut theta = fold_half_turn(theta);
        if w == h {
            // quarter-turn symmetric
            theta = (theta + PI / 4.0).rem_euclid(FRAC_PI_2) - PI / 4.0;
            if theta >= PI / 4.0 {
                theta -= FRAC_PI_2;
            }
        }
        if theta == 0.0 {
            theta = 0.0; // drop negative zero
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            theta,
        })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Same box with the angle rounded for stable serialization.
    pub fn quantized(&self) -> Self {
        Self::new(self.cx, self.cy, self.w, self.h, quantize_angle(self.theta))
            .expect("valid box stays valid")
    }

    /// Corners in the order local (-,-), (+,-), (+,+), (-,+).
    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.theta.sin_cos();
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .map(|(lx, ly)| Point::new(self.cx + lx * c - ly * s, self.cy + lx * s + ly * c))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }

    /// Rotates the box about `pivot` by `angle`.
    pub fn rotate_about(&self, pivot: Point, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let dx = self.cx - pivot.x;
        let dy = self.cy - pivot.y;
        Self::new(
            pivot.x + dx * c - dy * s,
            pivot.y + dx * s + dy * c,
            self.w,
            self.h,
            self.theta + angle,
        )
        .expect("rotation keeps extents")
    }

    /// Whether both boxes cover the same region up to `tol` per corner,
    /// independent of how the corners are labelled.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.corners();
        let b = other.corners();
        a.iter().all(|p| {
            b.iter()
                .any(|q| (p.x - q.x).abs() <= tol && (p.y - q.y).abs() <= tol)
        }) && b.iter().all(|p| {
            a.iter()
                .any(|q| (p.x - q.x).abs() <= tol && (p.y - q.y).abs() <= tol)
        })
    }
}

impl<'de> Deserialize<'de> for OrientedBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            cx: f64,
            cy: f64,
            w: f64,
            h: f64,
            theta: f64,
        }
        let r = Raw::deserialize(d)?;
        Self::new(r.cx, r.cy, r.w, r.h, r.theta).map_err(serde::de::Error::custom)
    }
}

/// Convex polygon with positive shoelace orientation
/// (`Σ x_i·y_{i+1} − x_{i+1}·y_i > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

impl ConvexPolygon {
    /// Accepts either winding and stores the positive one.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if !vertices.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
            return Err(GeometryError::NonFinite("polygon"));
        }
        let area = signed_area(&vertices);
        if area.abs() <= AREA_EPSILON {
            return Err(GeometryError::ZeroArea);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        let scale = vertices
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0, f64::max);
        let tol = 1e-12 * scale * scale;
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < -tol {
                return Err(GeometryError::NotConvex);
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bounding_box(&self) -> AxisAlignedBox {
        let mut b = AxisAlignedBox {
            x_min: f64::INFINITY,
            y_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in &self.vertices {
            b.x_min = b.x_min.min(p.x);
            b.y_min = b.y_min.min(p.y);
            b.x_max = b.x_max.max(p.x);
            b.y_max = b.y_max.max(p.y);
        }
        b
    }
}

pub fn obb_to_polygon(b: &OrientedBox) -> ConvexPolygon {
    ConvexPolygon {
        vertices: b.corners().to_vec(),
    }
}

pub fn polygon_area(p: &ConvexPolygon) -> f64 {
    p.area()
}

/// Sutherland–Hodgman clipping of `subject` by every edge of `clip`.
/// Returns `None` when the overlap has (numerically) no area.
pub fn polygon_intersection(
    subject: &ConvexPolygon,
    clip: &ConvexPolygon,
) -> Option<ConvexPolygon> {
    let mut output: Vec<Point> = subject.vertices.clone();
    let cv = &clip.vertices;
    for i in 0..cv.len() {
        if output.is_empty() {
            return None;
        }
        let a = cv[i];
        let b = cv[(i + 1) % cv.len()];
        let input = std::mem::take(&mut output);
        let side = |p: Point| cross(a, b, p);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(edge_crossing(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(edge_crossing(prev, cur, sp, sc));
            }
        }
    }
    output.dedup_by(|a, b| (a.x - b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-15);
    if output.len() >= 2 {
        let (f, l) = (output[0], output[output.len() - 1]);
        if (f.x - l.x).abs() < 1e-15 && (f.y - l.y).abs() < 1e-15 {
            output.pop();
        }
    }
    if output.len() < 3 {
        return None;
    }
    let area = signed_area(&output);
    if area <= AREA_EPSILON {
        return None;
    }
    Some(ConvexPolygon { vertices: output })
}

fn edge_crossing(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

pub fn aabb_iou(a: &AxisAlignedBox, b: &AxisAlignedBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 || inter <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn polygon_iou(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    // fixed operand order so iou(a,b) == iou(b,a) bit for bit
    let (first, second) = if polygon_order(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let inter = match polygon_intersection(first, second) {
        Some(p) => p.area(),
        None => return 0.0,
    };
    let (area_a, area_b) = (a.area(), b.area());
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

fn polygon_order(a: &ConvexPolygon, b: &ConvexPolygon) -> Ordering {
    let key =
        |p: &ConvexPolygon| -> Vec<(f64, f64)> { p.vertices.iter().map(|v| (v.x, v.y)).collect() };
    let (ka, kb) = (key(a), key(b));
    ka.partial_cmp(&kb).unwrap_or(Ordering::Equal)
}

pub fn obb_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    if a == b {
        return 1.0;
    }
    // cheap reject on circumscribed circles
    let ra = a.w.hypot(a.h) / 2.0;
    let rb = b.w.hypot(b.h) / 2.0;
    if (a.cx - b.cx).hypot(a.cy - b.cy) > ra + rb {
        return 0.0;
    }
    polygon_iou(&obb_to_polygon(a), &obb_to_polygon(b))
}

pub fn enclosing_aabb(b: &OrientedBox) -> AxisAlignedBox {
    obb_to_polygon(b).bounding_box()
}

pub fn remap_to_global(local: &OrientedBox, view_origin: Point) -> OrientedBox {
    local.translate(view_origin.x, view_origin.y)
}

/// Geometry carried by a detection.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Axis(AxisAlignedBox),
    Oriented(OrientedBox),
    /// Arbitrary convex quad, e.g. a label read in normalized coordinates
    /// where rotated rectangles are sheared into parallelograms.
    Polygon(ConvexPolygon),
}

impl Geometry {
    pub fn to_polygon(&self) -> Option<ConvexPolygon> {
        match self {
            Geometry::Axis(b) => b.to_polygon(),
            Geometry::Oriented(b) => Some(obb_to_polygon(b)),
            Geometry::Polygon(p) => Some(p.clone()),
        }
    }

    pub fn bounding_box(&self) -> AxisAlignedBox {
        match self {
            Geometry::Axis(b) => *b,
            Geometry::Oriented(b) => enclosing_aabb(b),
            Geometry::Polygon(p) => p.bounding_box(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Geometry::Axis(b) => b.area(),
            Geometry::Oriented(b) => b.area(),
            Geometry::Polygon(p) => p.area(),
        }
    }
}

/// IoU between any two geometries: exact area ratio, using the cheapest
/// route that applies.
pub fn iou(a: &Geometry, b: &Geometry) -> f64 {
    match (a, b) {
        (Geometry::Axis(x), Geometry::Axis(y)) => aabb_iou(x, y),
        (Geometry::Oriented(x), Geometry::Oriented(y)) => obb_iou(x, y),
        _ => match (a.to_polygon(), b.to_polygon()) {
            (Some(p), Some(q)) => polygon_iou(&p, &q),
            _ => 0.0,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBox {
    pub class_id: u32,
    pub geometry: Geometry,
    confidence: f64,
}

impl ScoredBox {
    pub fn new(class_id: u32, geometry: Geometry, confidence: f64) -> Result<Self, GeometryError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(GeometryError::Confidence(confidence));
        }
        Ok(Self {
            class_id,
            geometry,
            confidence,
        })
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Indices of the boxes greedy class-wise NMS keeps, in keep order.
///
/// Order is confidence descending, ties by class id then input index.
/// A box survives iff its IoU with every already-kept box of the same
/// class is `<= iou_threshold`.
pub fn nms_indices(dets: &[ScoredBox], iou_threshold: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&i, &j| {
        dets[j]
            .confidence
            .total_cmp(&dets[i].confidence)
            .then(dets[i].class_id.cmp(&dets[j].class_id))
            .then(i.cmp(&j))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let suppressed = kept.iter().any(|&k| {
            dets[k].class_id == dets[i].class_id
                && iou(&dets[k].geometry, &dets[i].geometry) > iou_threshold
        });
        if !suppressed {
            kept.push(i);
        }
    }
    kept
}

pub fn nms(dets: &[ScoredBox], iou_threshold: f64) -> Vec<ScoredBox> {
    nms_indices(dets, iou_threshold)
        .into_iter()
        .map(|i| dets[i].clone())
        .collect()
}
