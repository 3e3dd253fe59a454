use crate::error::{Error, Result};
use crate::netmodel::StallMode;
use crate::tensor::Tensor;

/// Luminance volume. `luma` is laid out `[height, width, frames]`, so the
/// frame index varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoVolume {
    luma: Tensor,
    frame_rate: f64,
}

impl VideoVolume {
    /// Wraps a `[height, width, frames]` tensor whose samples lie in `[0, 255]`.
    pub fn new(luma: Tensor, frame_rate: f64) -> Result<Self> {
        if luma.rank() != 3 {
            return Err(Error::dim(
                None,
                format!("luma must be [height, width, frames], got {:?}", luma.shape()),
            ));
        }
        if let Some(i) = luma.data().iter().position(|v| !(0.0..=255.0).contains(v)) {
            return Err(Error::Domain(format!(
                "luma sample {} at flat index {i} outside [0, 255]",
                luma.data()[i]
            )));
        }
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(Error::Domain(format!("frame rate must be positive, got {frame_rate}")));
        }
        Ok(VideoVolume { luma, frame_rate })
    }

    /// Builds a volume from 8-bit frames stored row by row (`y * width + x`).
    pub fn from_frames(width: usize, height: usize, frame_rate: f64, frames: &[&[u8]]) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::dim(2, "a volume needs at least one frame"));
        }
        let f = frames.len();
        let mut data = vec![0.0; width * height * f];
        for (t, frame) in frames.iter().enumerate() {
            if frame.len() != width * height {
                return Err(Error::dim(
                    None,
                    format!("frame {t} has {} samples, expected {}", frame.len(), width * height),
                ));
            }
            for (pos, &v) in frame.iter().enumerate() {
                data[pos * f + t] = v as f64;
            }
        }
        VideoVolume::new(Tensor::new([height, width, f], data)?, frame_rate)
    }

    pub fn width(&self) -> usize {
        self.luma.shape()[1]
    }

    pub fn height(&self) -> usize {
        self.luma.shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.luma.shape()[2]
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn luma(&self) -> &Tensor {
        &self.luma
    }

    pub fn sample(&self, x: usize, y: usize, t: usize) -> f64 {
        self.luma.data()[(y * self.width() + x) * self.frames() + t]
    }

    /// One frame as 8-bit samples in raster order.
    pub fn frame_bytes(&self, t: usize) -> Vec<u8> {
        let f = self.frames();
        self.luma
            .data()
            .chunks(f)
            .map(|row| row[t].round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub(crate) fn prepend_frames(&self, n: usize, mode: StallMode) -> Result<VideoVolume> {
        if n == 0 {
            return Ok(self.clone());
        }
        let f = self.frames();
        let mut data = Vec::with_capacity(self.luma.len() + n * self.width() * self.height());
        for row in self.luma.data().chunks(f) {
            let fill = match mode {
                StallMode::Freeze => row[0],
                StallMode::Black => 0.0,
            };
            data.extend(std::iter::repeat(fill).take(n));
            data.extend_from_slice(row);
        }
        VideoVolume::new(
            Tensor::new([self.height(), self.width(), f + n], data)?,
            self.frame_rate,
        )
    }

    pub(crate) fn drop_leading_frames(&self, n: usize) -> Result<VideoVolume> {
        let f = self.frames();
        if n >= f {
            return Err(Error::dim(
                2,
                format!("cannot drop {n} of {f} frames and keep a non-empty volume"),
            ));
        }
        let data = self
            .luma
            .data()
            .chunks(f)
            .flat_map(|row| row[n..].iter().copied())
            .collect();
        VideoVolume::new(
            Tensor::new([self.height(), self.width(), f - n], data)?,
            self.frame_rate,
        )
    }
}
