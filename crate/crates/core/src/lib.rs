//! Interpretation of multi-view engineering drawings.
//!
//! Three stages turn a drawing into a single structured document:
//! layout regions (views, title block, notes) are detected first, each view
//! is then searched for oriented annotations (measures, GD&T frames,
//! surface roughness), and finally every region and annotation patch is
//! read into text and parsed. Neural models sit behind the traits in
//! [`pipeline`]; [`pipeline::replay`] serves recorded outputs so the whole
//! flow is deterministic and testable.

pub mod annoparse;
pub mod canonical;
pub mod eval;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod schema;

pub use annoparse::{
    parse_annotation, parse_gdt, parse_measure, parse_roughness, GdtCharacteristic, GdtFrame,
    MeasureKind, MeasureSpec, ParsedAnnotation, RoughnessSpec,
};
pub use geometry::{AxisAlignedBox, ConvexPolygon, Geometry, OrientedBox, Point, ScoredBox};
pub use schema::{AnnotationClass, RegionClass, UnifiedDrawing};
