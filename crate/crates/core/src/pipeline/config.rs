use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PairKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReaderRole {
    Alphabetical,
    Numerical,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {key} = {value} outside {range}")]
    Range {
        key: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// Flat key/value settings; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub nms_iou_threshold: f64,
    pub stage1_min_confidence: f64,
    pub stage2_min_confidence: f64,
    /// Pixels added around view crops and annotation patches.
    pub crop_padding: f64,
    pub route_title_block: ReaderRole,
    pub route_notes: ReaderRole,
    pub route_annotations: ReaderRole,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            nms_iou_threshold: 0.45,
            stage1_min_confidence: 0.25,
            stage2_min_confidence: 0.25,
            crop_padding: 4.0,
            route_title_block: ReaderRole::Alphabetical,
            route_notes: ReaderRole::Alphabetical,
            route_annotations: ReaderRole::Numerical,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, value) in [
            ("nms_iou_threshold", self.nms_iou_threshold),
            ("stage1_min_confidence", self.stage1_min_confidence),
            ("stage2_min_confidence", self.stage2_min_confidence),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Range {
                    key,
                    value,
                    range: "[0, 1]",
                });
            }
        }
        if !(self.crop_padding >= 0.0 && self.crop_padding.is_finite()) {
            return Err(ConfigError::Range {
                key: "crop_padding",
                value: self.crop_padding,
                range: "[0, inf)",
            });
        }
        Ok(())
    }

    pub fn role_for(&self, kind: PairKind) -> ReaderRole {
        match kind {
            PairKind::TitleBlock => self.route_title_block,
            PairKind::Notes => self.route_notes,
            PairKind::Measure | PairKind::Gdt | PairKind::Roughness => self.route_annotations,
        }
    }
}
