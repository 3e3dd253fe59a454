//! Headerless 8-bit raw video files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VideoVolume;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawFormat {
    /// Planar Y, U, V with 2x2 chroma subsampling (`.yuv`).
    Planar420,
    /// Luma plane only (`.yraw`).
    YOnly,
}

impl RawFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("yuv") => Ok(RawFormat::Planar420),
            Some("yraw") => Ok(RawFormat::YOnly),
            _ => Err(Error::Config(format!(
                "cannot infer raw format of {} (expected .yuv or .yraw)",
                path.display()
            ))),
        }
    }

    /// Bytes per frame for the given luma dimensions.
    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        let luma = width * height;
        match self {
            RawFormat::YOnly => luma,
            RawFormat::Planar420 => luma + 2 * (width.div_ceil(2) * height.div_ceil(2)),
        }
    }
}

/// Decodes the Y plane of every frame from an in-memory raw buffer.
pub fn decode_luma(
    bytes: &[u8],
    width: usize,
    height: usize,
    frames: usize,
    frame_rate: f64,
    format: RawFormat,
) -> Result<VideoVolume> {
    let stride = format.frame_bytes(width, height);
    let luma = width * height;
    let planes: Vec<&[u8]> = bytes
        .chunks_exact(stride)
        .take(frames)
        .map(|f| &f[..luma])
        .collect();
    VideoVolume::from_frames(width, height, frame_rate, &planes)
}

/// Reads the luminance plane of a raw video. Dimensions always come from
/// the caller; the file length must match them exactly.
pub fn read_yuv_luma(
    path: &Path,
    width: usize,
    height: usize,
    frames: usize,
    frame_rate: f64,
    format: RawFormat,
) -> Result<VideoVolume> {
    if width == 0 || height == 0 || frames == 0 {
        return Err(Error::Config(format!(
            "video dimensions must be positive, got {width}x{height}x{frames}"
        )));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = (format.frame_bytes(width, height) * frames) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    decode_luma(&bytes, width, height, frames, frame_rate, format)
}

/// Writes a volume as a Y-only raw file.
pub fn write_y_only(path: &Path, volume: &VideoVolume) -> Result<()> {
    let mut bytes = Vec::with_capacity(volume.width() * volume.height() * volume.frames());
    for t in 0..volume.frames() {
        bytes.extend(volume.frame_bytes(t));
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
