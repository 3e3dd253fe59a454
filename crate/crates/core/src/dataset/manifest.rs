//! JSON dataset manifests: one array of flat item records.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DiscretizationSpec, RawFormat};
use crate::error::{Error, Result};

/// Encoder QPs of the reference dataset.
pub const DEFAULT_QP_SET: [i64; 5] = [18, 24, 28, 32, 40];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetItem {
    pub id: String,
    /// Raw video path, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub qp: i64,
    pub preset: String,
    pub bitrate_bps: f64,
    pub mos: f64,
}

impl DatasetItem {
    pub fn validate(&self, qp_set: &[i64]) -> Result<()> {
        let fail = |message: String| Error::Schema {
            record: self.id.clone(),
            message,
        };
        if self.id.is_empty() {
            return Err(fail("empty id".into()));
        }
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(fail(format!(
                "dimensions must be positive, got {}x{}x{}",
                self.width, self.height, self.frames
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(fail(format!("fps must be positive, got {}", self.fps)));
        }
        if !qp_set.contains(&self.qp) {
            return Err(fail(format!("qp {} not in {:?}", self.qp, qp_set)));
        }
        if self.preset.is_empty() {
            return Err(fail("empty preset name".into()));
        }
        if !(self.bitrate_bps > 0.0 && self.bitrate_bps.is_finite()) {
            return Err(fail(format!("bitrate must be positive, got {}", self.bitrate_bps)));
        }
        if !(1.0..=5.0).contains(&self.mos) {
            return Err(fail(format!("mos {} outside [1, 5]", self.mos)));
        }
        Ok(())
    }

    pub fn label(&self, spec: &DiscretizationSpec) -> Result<usize> {
        spec.classify(self.mos)
    }

    pub fn duration_s(&self) -> f64 {
        self.frames as f64 / self.fps
    }

    pub fn resolve_path(&self, manifest_dir: &Path) -> PathBuf {
        if self.path.is_absolute() {
            self.path.clone()
        } else {
            manifest_dir.join(&self.path)
        }
    }

    pub fn format(&self) -> Result<RawFormat> {
        RawFormat::from_path(&self.path)
    }
}

pub fn parse_manifest(text: &str, qp_set: &[i64]) -> Result<Vec<DatasetItem>> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| Error::Schema {
        record: "<manifest>".into(),
        message: e.to_string(),
    })?;
    let mut items = Vec::with_capacity(values.len());
    let mut ids = HashSet::new();
    for (i, value) in values.into_iter().enumerate() {
        let record = value
            .get("id")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{i}"));
        let item: DatasetItem = serde_json::from_value(value).map_err(|e| Error::Schema {
            record: record.clone(),
            message: e.to_string(),
        })?;
        item.validate(qp_set)?;
        if !ids.insert(item.id.clone()) {
            return Err(Error::Schema {
                record,
                message: "duplicate id".into(),
            });
        }
        items.push(item);
    }
    Ok(items)
}

pub fn load_manifest(path: &Path) -> Result<Vec<DatasetItem>> {
    load_manifest_with(path, &DEFAULT_QP_SET)
}

pub fn load_manifest_with(path: &Path, qp_set: &[i64]) -> Result<Vec<DatasetItem>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, qp_set)
}

pub fn manifest_to_string(items: &[DatasetItem]) -> String {
    serde_json::to_string_pretty(items).expect("items serialize") + "\n"
}

pub fn write_manifest(items: &[DatasetItem], path: &Path) -> Result<()> {
    fs::write(path, manifest_to_string(items)).map_err(|e| Error::io(path, e))
}
