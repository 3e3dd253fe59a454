//! Synthetic distorted-video generator.
//!
//! Each item is a textured pattern: two coarse translating gratings, one
//! fine grating and per-sample grain. A class-dependent distortion then
//! box-blurs each frame and uniformly quantizes the result, so wider blurs
//! and coarser steps stand in for stronger compression and its loss of
//! detail.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetItem, VideoVolume};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionLevel {
    /// Radius of the spatial box blur.
    pub blur: usize,
    /// Quantization step applied after blurring.
    pub step: u32,
    /// QP recorded in the manifest for items at this level.
    pub qp: i64,
}

/// Worst to best: class 0 is the coarsest quantization.
pub fn default_levels() -> Vec<DistortionLevel> {
    vec![
        DistortionLevel { blur: 3, step: 4, qp: 40 },
        DistortionLevel { blur: 1, step: 2, qp: 28 },
        DistortionLevel { blur: 0, step: 1, qp: 18 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub items_per_class: usize,
    pub classes: usize,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub seed: u64,
    pub preset: String,
    pub levels: Vec<DistortionLevel>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            items_per_class: 3,
            classes: 3,
            width: 64,
            height: 64,
            frames: 32,
            fps: 25.0,
            seed: 0,
            preset: "cond4".into(),
            levels: default_levels(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.items_per_class == 0 {
            return Err(Error::Config("items_per_class must be at least 1".into()));
        }
        if self.classes == 0 || self.classes > self.levels.len() {
            return Err(Error::Config(format!(
                "{} classes requested but only {} distortion levels defined",
                self.classes,
                self.levels.len()
            )));
        }
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(Error::Config("synthetic dimensions must be positive".into()));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Config("fps must be positive".into()));
        }
        if self.levels.iter().any(|l| l.step == 0) {
            return Err(Error::Config("quantization steps must be positive".into()));
        }
        Ok(())
    }

    /// MOS assigned to a class: the centre of its bin in an equal split of `[1, 5]`.
    pub fn class_mos(&self, class: usize) -> f64 {
        1.0 + (class as f64 + 0.5) * 4.0 / self.classes as f64
    }
}

struct Grating {
    kx: f64,
    ky: f64,
    velocity: f64,
    phase: f64,
}

impl Grating {
    fn random(rng: &mut ChaCha8Rng, periods: std::ops::Range<f64>) -> Self {
        let angle = rng.gen_range(0.0..TAU);
        let period = rng.gen_range(periods);
        Grating {
            kx: angle.cos() / period,
            ky: angle.sin() / period,
            velocity: rng.gen_range(0.02..0.08),
            phase: rng.gen_range(0.0..TAU),
        }
    }

    fn at(&self, x: f64, y: f64, t: f64) -> f64 {
        (TAU * (self.kx * x + self.ky * y - self.velocity * t) + self.phase).sin()
    }
}

/// Integer-valued textured base pattern in `[0, 255]`, laid out `[h, w, f]`.
pub fn base_pattern(width: usize, height: usize, frames: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let g1 = Grating::random(rng, 24.0..56.0);
    let g2 = Grating::random(rng, 24.0..56.0);
    let fine = Grating::random(rng, 4.0..4.5);
    let mut data = Vec::with_capacity(width * height * frames);
    for y in 0..height {
        for x in 0..width {
            for t in 0..frames {
                let (xf, yf, tf) = (x as f64, y as f64, t as f64);
                let v = 127.5
                    + 30.0 * g1.at(xf, yf, tf)
                    + 30.0 * g2.at(xf, yf, tf)
                    + 30.0 * fine.at(xf, yf, tf)
                    + rng.gen_range(-20.0..20.0);
                data.push(v.round().clamp(0.0, 255.0));
            }
        }
    }
    Tensor::new([height, width, frames], data).expect("pattern shape")
}

/// Spatial box blur of odd width `2r + 1` applied separably along x and y
/// within each frame; samples beyond the border repeat the edge sample.
/// A radius of 0 is the identity.
pub fn box_blur(luma: &Tensor, radius: usize) -> Tensor {
    if radius == 0 {
        return luma.clone();
    }
    let &[h, w, f] = luma.shape() else {
        panic!("box_blur expects a [h, w, f] volume");
    };
    let width = (2 * radius + 1) as f64;
    let pass = |src: &[f64], along_x: bool| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..h {
            for x in 0..w {
                for t in 0..f {
                    let mut sum = 0.0;
                    for d in 0..=2 * radius {
                        let o = d as isize - radius as isize;
                        let (yy, xx) = if along_x {
                            (y, (x as isize + o).clamp(0, w as isize - 1) as usize)
                        } else {
                            ((y as isize + o).clamp(0, h as isize - 1) as usize, x)
                        };
                        sum += src[(yy * w + xx) * f + t];
                    }
                    out[(y * w + x) * f + t] = sum / width;
                }
            }
        }
        out
    };
    let horizontal = pass(luma.data(), true);
    Tensor::new([h, w, f], pass(&horizontal, false)).expect("same shape")
}

/// Mid-tread uniform quantizer on `[0, 255]`; a step of 1 rounds to the
/// nearest integer, which is the identity on integer inputs.
pub fn quantize(value: f64, step: u32) -> f64 {
    if step <= 1 {
        return value.round().clamp(0.0, 255.0);
    }
    let s = step as f64;
    ((value / s).floor() * s + (s / 2.0).floor()).min(255.0)
}

#[derive(Debug, Clone)]
pub struct SynthItem {
    pub item: DatasetItem,
    pub label: usize,
    pub volume: VideoVolume,
    pub base: Tensor,
}

/// Generates `items_per_class * classes` labelled volumes, class-major.
pub fn synthesize_dataset(config: &SynthConfig) -> Result<Vec<SynthItem>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.items_per_class * config.classes);
    for class in 0..config.classes {
        let level = config.levels[class];
        for i in 0..config.items_per_class {
            let base = base_pattern(config.width, config.height, config.frames, &mut rng);
            let blurred = box_blur(&base, level.blur);
            let data = blurred.data().iter().map(|&v| quantize(v, level.step)).collect();
            let luma = Tensor::new(base.shape(), data)?;
            let id = format!("synth_c{class}_{i:03}");
            let item = DatasetItem {
                path: format!("videos/{id}.yraw").into(),
                id,
                width: config.width,
                height: config.height,
                frames: config.frames,
                fps: config.fps,
                qp: level.qp,
                preset: config.preset.clone(),
                bitrate_bps: 8.0e6 / ((level.step as usize * (2 * level.blur + 1)) as f64).sqrt(),
                mos: config.class_mos(class),
            };
            out.push(SynthItem {
                item,
                label: class,
                volume: VideoVolume::new(luma, config.fps)?,
                base,
            });
        }
    }
    Ok(out)
}
