//! TCP throughput, start-up delay, and stall embedding into raw video.
//!
//! Throughput follows the square-root loss model
//! `R = 1.22 · M / (T · √L)` with the segment size `M` expressed in bits.
//! A clip of bitrate `B` and duration `N` then waits `δ = (B / R) · N`
//! seconds before playback, which is rendered as stall frames prepended to
//! the luminance volume.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::VideoVolume;
use crate::error::{Error, Result};

/// Constant of the square-root throughput model.
pub const MATHIS_CONSTANT: f64 = 1.22;

/// Relative gap above which a preset's nominal rate is flagged.
pub const PRESET_TOLERANCE: f64 = 0.02;

const BUILTIN_PRESETS: &str = include_str!("../resources/presets.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkCondition {
    pub mss_bytes: f64,
    pub rtt_s: f64,
    pub loss_rate: f64,
}

impl NetworkCondition {
    pub fn new(mss_bytes: f64, rtt_s: f64, loss_rate: f64) -> Result<Self> {
        let c = NetworkCondition {
            mss_bytes,
            rtt_s,
            loss_rate,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mss_bytes > 0.0 && self.mss_bytes.is_finite()) {
            return Err(Error::Domain(format!("MSS must be positive, got {}", self.mss_bytes)));
        }
        if !(self.rtt_s > 0.0 && self.rtt_s.is_finite()) {
            return Err(Error::Domain(format!("RTT must be positive, got {}", self.rtt_s)));
        }
        if !(self.loss_rate > 0.0 && self.loss_rate <= 1.0) {
            return Err(Error::Domain(format!(
                "loss rate must lie in (0, 1], got {}",
                self.loss_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipTransmission {
    pub bitrate_bps: f64,
    pub duration_s: f64,
    pub frame_rate: f64,
}

impl ClipTransmission {
    pub fn new(bitrate_bps: f64, duration_s: f64, frame_rate: f64) -> Result<Self> {
        for (name, v) in [
            ("bitrate", bitrate_bps),
            ("duration", duration_s),
            ("frame rate", frame_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(ClipTransmission {
            bitrate_bps,
            duration_s,
            frame_rate,
        })
    }
}

/// Achievable TCP rate in bits per second.
pub fn throughput(cond: &NetworkCondition) -> Result<f64> {
    cond.validate()?;
    Ok(MATHIS_CONSTANT * cond.mss_bytes * 8.0 / (cond.rtt_s * cond.loss_rate.sqrt()))
}

/// Start-up delay in seconds for a clip pushed through a link of `rate_bps`.
pub fn delay(clip: &ClipTransmission, rate_bps: f64) -> Result<f64> {
    if !(rate_bps > 0.0 && rate_bps.is_finite()) {
        return Err(Error::Domain(format!("rate must be positive, got {rate_bps}")));
    }
    if clip.bitrate_bps < 0.0 || clip.duration_s < 0.0 {
        return Err(Error::Domain("bitrate and duration must be non-negative".into()));
    }
    Ok(clip.bitrate_bps / rate_bps * clip.duration_s)
}

/// Number of stall frames for a delay, rounding half up.
pub fn stall_frames(delay_s: f64, frame_rate: f64) -> Result<usize> {
    if !(delay_s >= 0.0 && delay_s.is_finite()) {
        return Err(Error::Domain(format!("delay must be non-negative, got {delay_s}")));
    }
    if !(frame_rate > 0.0 && frame_rate.is_finite()) {
        return Err(Error::Domain(format!("frame rate must be positive, got {frame_rate}")));
    }
    Ok((delay_s * frame_rate + 0.5).floor() as usize)
}

/// Pixel content of prepended stall frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallMode {
    /// Repeat the first frame.
    #[default]
    Freeze,
    /// Zero luminance.
    Black,
}

/// Prepends `round(δ · fps)` stall frames.
pub fn embed_delay(
    volume: &VideoVolume,
    delay_s: f64,
    frame_rate: f64,
    mode: StallMode,
) -> Result<VideoVolume> {
    let n = stall_frames(delay_s, frame_rate)?;
    volume.prepend_frames(n, mode)
}

/// Inverse of [`embed_delay`]: drops the first `stall` frames.
pub fn strip_stall(volume: &VideoVolume, stall: usize) -> Result<VideoVolume> {
    volume.drop_leading_frames(stall)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionPreset {
    pub name: String,
    pub condition: NetworkCondition,
    pub nominal_rate_bps: f64,
    /// Model rate and nominal rate differ by more than [`PRESET_TOLERANCE`].
    pub inconsistent: bool,
}

impl ConditionPreset {
    pub fn new(name: impl Into<String>, condition: NetworkCondition, nominal_rate_bps: f64) -> Result<Self> {
        let rate = throughput(&condition)?;
        let inconsistent = (rate - nominal_rate_bps).abs() > PRESET_TOLERANCE * nominal_rate_bps;
        Ok(ConditionPreset {
            name: name.into(),
            condition,
            nominal_rate_bps,
            inconsistent,
        })
    }

    pub fn rate_bps(&self) -> f64 {
        throughput(&self.condition).expect("validated at construction")
    }

    /// Relative deviation of the model rate from the nominal one.
    pub fn relative_gap(&self) -> f64 {
        (self.rate_bps() - self.nominal_rate_bps) / self.nominal_rate_bps
    }
}

/// Parses a whitespace-separated preset table; `#` starts a comment.
pub fn parse_presets(text: &str) -> Result<Vec<ConditionPreset>> {
    let mut presets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Config(format!(
                "preset table line {}: expected 5 fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                Error::Config(format!(
                    "preset table line {}: '{}' is not a number",
                    lineno + 1,
                    fields[i]
                ))
            })
        };
        let cond = NetworkCondition::new(num(1)?, num(2)?, num(3)?)?;
        presets.push(ConditionPreset::new(fields[0], cond, num(4)?)?);
    }
    Ok(presets)
}

pub fn builtin_presets() -> Vec<ConditionPreset> {
    parse_presets(BUILTIN_PRESETS).expect("built-in preset table is valid")
}

pub fn load_presets(path: &Path) -> Result<Vec<ConditionPreset>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_presets(&text)
}

pub fn find_preset<'a>(presets: &'a [ConditionPreset], name: &str) -> Result<&'a ConditionPreset> {
    presets
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown network preset '{name}'")))
}
