use serde::{Deserialize, Serialize};

use super::VideoVolume;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const DEFAULT_PATCH_EDGE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub k: usize,
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec { k: DEFAULT_PATCH_EDGE }
    }
}

impl PatchSpec {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("patch edge must be positive".into()));
        }
        Ok(PatchSpec { k })
    }

    /// Patch grid extents `(nx, ny, nt)` for a volume; errors if `k` exceeds
    /// any dimension.
    pub fn grid(&self, volume: &VideoVolume) -> Result<(usize, usize, usize)> {
        self.grid_for(volume.width(), volume.height(), volume.frames())
    }

    /// [`PatchSpec::grid`] from bare dimensions. Axis numbers in errors are
    /// 0 for height, 1 for width and 2 for frames.
    pub fn grid_for(&self, width: usize, height: usize, frames: usize) -> Result<(usize, usize, usize)> {
        let dims = [height, width, frames];
        for (axis, &d) in dims.iter().enumerate() {
            if self.k > d {
                return Err(Error::dim(
                    axis,
                    format!("patch edge {} exceeds volume extent {d}", self.k),
                ));
            }
        }
        Ok((width / self.k, height / self.k, frames / self.k))
    }
}

/// A `k x k x k` luminance cube, laid out `[y, x, t]` like its source volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub cube: Tensor,
    pub label: usize,
    pub source_item: String,
    /// Grid cell `(bx, by, bt)`.
    pub grid_position: (usize, usize, usize),
}

/// Copies the cube at grid cell `(bx, by, bt)`.
pub fn cube_at(volume: &VideoVolume, k: usize, (bx, by, bt): (usize, usize, usize)) -> Tensor {
    let (w, f) = (volume.width(), volume.frames());
    let src = volume.luma().data();
    let mut data = Vec::with_capacity(k * k * k);
    for y in by * k..(by + 1) * k {
        for x in bx * k..(bx + 1) * k {
            let start = (y * w + x) * f + bt * k;
            data.extend_from_slice(&src[start..start + k]);
        }
    }
    Tensor::new([k, k, k], data).expect("cube shape")
}

/// Splits a volume into non-overlapping aligned cubes, discarding the
/// remainder at the right, bottom and end. Cells are ordered with `bx`
/// slowest and `bt` fastest; every patch carries `label`.
pub fn extract_patches(
    volume: &VideoVolume,
    spec: &PatchSpec,
    label: usize,
    source_item: &str,
) -> Result<Vec<Patch>> {
    let (nx, ny, nt) = spec.grid(volume)?;
    let mut patches = Vec::with_capacity(nx * ny * nt);
    for bx in 0..nx {
        for by in 0..ny {
            for bt in 0..nt {
                patches.push(Patch {
                    cube: cube_at(volume, spec.k, (bx, by, bt)),
                    label,
                    source_item: source_item.to_string(),
                    grid_position: (bx, by, bt),
                });
            }
        }
    }
    Ok(patches)
}
