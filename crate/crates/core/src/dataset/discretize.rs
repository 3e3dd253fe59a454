//! MOS to class-index quantization over the ACR range `[1, 5]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MOS_MIN: f64 = 1.0;
pub const MOS_MAX: f64 = 5.0;

/// Interval sizes swept in the discretization study.
pub const STUDY_SIZES: [f64; 4] = [1.33, 0.5, 0.25, 0.125];

// Absorbs representation error at bin boundaries, e.g. (1.3 - 1) / 0.1.
const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    pub interval_size: f64,
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec { interval_size: 1.33 }
    }
}

impl DiscretizationSpec {
    pub fn new(interval_size: f64) -> Result<Self> {
        let spec = DiscretizationSpec { interval_size };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.interval_size;
        if !(s > 0.0 && s.is_finite() && s <= MOS_MAX - MOS_MIN) {
            return Err(Error::Config(format!(
                "interval size must lie in (0, 4], got {s}"
            )));
        }
        Ok(())
    }

    /// A size of 1.33 is read as 4/3: three equal bins over `[1, 5]`.
    fn is_thirds(&self) -> bool {
        (self.interval_size - 4.0 / 3.0).abs() <= 0.01
    }

    pub fn bin_width(&self) -> f64 {
        if self.is_thirds() {
            (MOS_MAX - MOS_MIN) / 3.0
        } else {
            self.interval_size
        }
    }

    /// Nominal number of bins covering `[1, 5]`.
    pub fn num_bins(&self) -> usize {
        if self.is_thirds() {
            3
        } else {
            ((MOS_MAX - MOS_MIN) / self.interval_size - BOUNDARY_SLACK).ceil() as usize
        }
    }

    /// Lower edges of each bin.
    pub fn bin_edges(&self) -> Vec<f64> {
        (0..self.num_bins())
            .map(|i| MOS_MIN + i as f64 * self.bin_width())
            .collect()
    }

    /// Bins are half-open `[lo, hi)`; 5.0 falls in the last bin.
    pub fn classify(&self, mos: f64) -> Result<usize> {
        if !(MOS_MIN..=MOS_MAX).contains(&mos) {
            return Err(Error::Label(format!("MOS {mos} outside [1, 5]")));
        }
        let raw = ((mos - MOS_MIN) / self.bin_width() + BOUNDARY_SLACK).floor() as usize;
        Ok(raw.min(self.num_bins() - 1))
    }

    /// Number of distinct bins hit by `mos_values`.
    pub fn occupied_bins(&self, mos_values: impl IntoIterator<Item = f64>) -> Result<usize> {
        let mut hit = vec![false; self.num_bins()];
        for m in mos_values {
            hit[self.classify(m)?] = true;
        }
        Ok(hit.into_iter().filter(|&h| h).count())
    }
}

pub fn discretize_mos(mos: f64, spec: &DiscretizationSpec) -> Result<usize> {
    spec.classify(mos)
}
