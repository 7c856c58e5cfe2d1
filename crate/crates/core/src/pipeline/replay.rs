//! Replay backend: serves recorded detections and reader strings.
//!
//! `replay.json` layout:
//!
//! ```json
//! {"drawings": {"<drawing_id>": {
//!     "regions": [{"class": "view", "bbox": [x0, y0, x1, y1], "confidence": 0.9}],
//!     "views": {"view-1": [{"class": "gdt", "obb": {"cx": 0, "cy": 0, "w": 1, "h": 1, "theta": 0}, "confidence": 0.8}]},
//!     "texts": {"view-1/1": "⌖|⌀0.1|A", "notes-1": {"error": "reader timeout"}}
//! }}}
//! ```
//!
//! View OBBs are in crop-local coordinates. A drawing entry claims full
//! coverage: every view and patch key the pipeline asks for must exist.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    AnnotationDetection, AnnotationDetector, BackendError, CropRef, DrawingRef, PatchRef, Ports,
    ReaderRole, RegionDetection, RegionDetector, TextReader,
};
use crate::geometry::{AxisAlignedBox, OrientedBox};
use crate::schema::{AnnotationClass, RegionClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayRegion {
    pub class: RegionClass,
    pub bbox: [f64; 4],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayAnnotation {
    pub class: AnnotationClass,
    pub obb: OrientedBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReplayText {
    Text(String),
    Failure { error: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplayDrawing {
    pub regions: Vec<ReplayRegion>,
    pub views: BTreeMap<String, Vec<ReplayAnnotation>>,
    pub texts: BTreeMap<String, ReplayText>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayManifest {
    pub drawings: BTreeMap<String, ReplayDrawing>,
}

impl ReplayManifest {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        crate::canonical::to_canonical_bytes(
            &serde_json::to_value(self).expect("manifest serializes"),
        )
    }

    fn drawing(&self, id: &str) -> Result<&ReplayDrawing, BackendError> {
        self.drawings
            .get(id)
            .ok_or_else(|| BackendError(format!("drawing '{id}' not in replay manifest")))
    }

    /// One reader per role, both backed by this manifest.
    pub fn readers(&self) -> [ReplayReader<'_>; 2] {
        [
            ReplayReader {
                manifest: self,
                role: ReaderRole::Alphabetical,
            },
            ReplayReader {
                manifest: self,
                role: ReaderRole::Numerical,
            },
        ]
    }

    pub fn ports<'a>(&'a self, readers: &'a [ReplayReader<'a>; 2]) -> Ports<'a> {
        Ports {
            regions: self,
            annotations: self,
            alphabetical: &readers[0],
            numerical: &readers[1],
        }
    }
}

impl RegionDetector for ReplayManifest {
    fn detect_regions(&self, drawing: &DrawingRef) -> Result<Vec<RegionDetection>, BackendError> {
        self.drawing(&drawing.drawing_id)?
            .regions
            .iter()
            .map(|r| {
                let [x0, y0, x1, y1] = r.bbox;
                let bbox =
                    AxisAlignedBox::new(x0, y0, x1, y1).map_err(|e| BackendError(e.to_string()))?;
                Ok(RegionDetection {
                    class: r.class,
                    bbox,
                    confidence: r.confidence,
                })
            })
            .collect()
    }
}

impl AnnotationDetector for ReplayManifest {
    fn detect_annotations(&self, crop: &CropRef) -> Result<Vec<AnnotationDetection>, BackendError> {
        let dets = self
            .drawing(&crop.drawing_id)?
            .views
            .get(&crop.view_id)
            .ok_or_else(|| {
                BackendError(format!("view '{}' not in replay manifest", crop.view_id))
            })?;
        Ok(dets
            .iter()
            .map(|a| AnnotationDetection {
                class: a.class,
                obb: a.obb,
                confidence: a.confidence,
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReplayReader<'a> {
    manifest: &'a ReplayManifest,
    role: ReaderRole,
}

impl TextReader for ReplayReader<'_> {
    fn role(&self) -> ReaderRole {
        self.role
    }

    fn read(&self, patch: &PatchRef) -> Result<String, BackendError> {
        match self
            .manifest
            .drawing(&patch.drawing_id)?
            .texts
            .get(&patch.key)
        {
            Some(ReplayText::Text(t)) => Ok(t.clone()),
            Some(ReplayText::Failure { error }) => Err(BackendError(error.clone())),
            None => Err(BackendError(format!(
                "text '{}' not in replay manifest",
                patch.key
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reserializes() {
        let json = r#"{"drawings":{"a":{"regions":[{"class":"notes","bbox":[0,0,5,5],"confidence":0.5}],
            "texts":{"notes-1":"x","title_block-1":{"error":"boom"}}}}}"#;
        let m = ReplayManifest::from_json(json.as_bytes()).unwrap();
        assert_eq!(
            m.drawings["a"].texts["title_block-1"],
            ReplayText::Failure {
                error: "boom".into()
            }
        );
        let again = ReplayManifest::from_json(&m.to_canonical_bytes()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_boxes() {
        assert!(ReplayManifest::from_json(br#"{"drawings":{},"extra":1}"#).is_err());
        assert!(ReplayManifest::from_json(
            br#"{"drawings":{"a":{"views":{"view-1":[{"class":"gdt","obb":{"cx":0,"cy":0,"w":0,"h":1,"theta":0},"confidence":1}]}}}}"#
        )
        .is_err());
    }
}
