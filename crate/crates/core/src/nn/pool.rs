use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Non-overlapping max-pooling window; the stride equals the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub window: [usize; 3],
}

impl PoolSpec {
    pub fn new(window: [usize; 3]) -> Result<Self> {
        if let Some(axis) = window.iter().position(|&w| w == 0) {
            return Err(Error::Config(format!("pool window on axis {axis} must be positive")));
        }
        Ok(PoolSpec { window })
    }

    /// Pooled extents; trailing samples that do not fill a window are dropped.
    pub fn output_extent(&self, input: [usize; 3]) -> Result<[usize; 3]> {
        let mut out = [0; 3];
        for axis in 0..3 {
            if self.window[axis] > input[axis] {
                return Err(Error::dim(
                    axis,
                    format!(
                        "pool window {} exceeds input extent {}",
                        self.window[axis], input[axis]
                    ),
                ));
            }
            out[axis] = input[axis] / self.window[axis];
        }
        Ok(out)
    }
}

/// Splits a rank-3 `[d0,d1,d2]` or rank-4 `[C,d0,d1,d2]` shape.
fn split_shape(shape: &[usize]) -> Result<(usize, [usize; 3])> {
    match *shape {
        [d0, d1, d2] => Ok((1, [d0, d1, d2])),
        [c, d0, d1, d2] => Ok((c, [d0, d1, d2])),
        _ => Err(Error::dim(
            None,
            format!("pooling expects rank 3 or 4 input, got {shape:?}"),
        )),
    }
}

/// Max-pools each channel. Returns the pooled tensor and, per output cell,
/// the flat input index of its maximum (first in row-major scan order on ties).
pub fn maxpool3d_forward(input: &Tensor, spec: &PoolSpec) -> Result<(Tensor, Vec<usize>)> {
    let (channels, dims) = split_shape(input.shape())?;
    let out = spec.output_extent(dims)?;
    let [w0, w1, w2] = spec.window;
    let [_, d1, d2] = dims;
    let x = input.data();
    let per_channel = dims.iter().product::<usize>();
    let n_out = channels * out.iter().product::<usize>();
    let mut values = Vec::with_capacity(n_out);
    let mut argmax = Vec::with_capacity(n_out);
    for c in 0..channels {
        let base = c * per_channel;
        for o0 in 0..out[0] {
            for o1 in 0..out[1] {
                for o2 in 0..out[2] {
                    let mut best_idx = usize::MAX;
                    let mut best = f64::NEG_INFINITY;
                    for a in 0..w0 {
                        for b in 0..w1 {
                            let row = base + ((o0 * w0 + a) * d1 + o1 * w1 + b) * d2 + o2 * w2;
                            for (d, &v) in x[row..row + w2].iter().enumerate() {
                                if best_idx == usize::MAX || v > best || (v.is_nan() && !best.is_nan()) {
                                    best = v;
                                    best_idx = row + d;
                                }
                            }
                        }
                    }
                    values.push(best);
                    argmax.push(best_idx);
                }
            }
        }
    }
    let shape = if input.rank() == 3 {
        out.to_vec()
    } else {
        vec![channels, out[0], out[1], out[2]]
    };
    Ok((Tensor::new(shape, values)?, argmax))
}

/// Routes each upstream gradient to the input cell that won its window.
pub fn maxpool3d_backward(
    grad_out: &Tensor,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor> {
    if grad_out.len() != argmax.len() {
        return Err(Error::Internal(format!(
            "{} gradients for {} argmax indices",
            grad_out.len(),
            argmax.len()
        )));
    }
    let mut grad_in = Tensor::zeros(input_shape);
    let n = grad_in.len();
    let gi = grad_in.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        if idx >= n {
            return Err(Error::Internal(format!(
                "argmax index {idx} out of bounds for input of {n} elements"
            )));
        }
        gi[idx] += g;
    }
    Ok(grad_in)
}
