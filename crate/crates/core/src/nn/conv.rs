//! Multi-channel 3D convolution (and its 1D specialization) via im2col + GEMM.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::gemm;

/// Trainable state of a convolution layer.
///
/// `kernels` has shape `[filters, in_channels, k0, k1, k2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    kernels: Tensor,
    biases: Vec<f64>,
    padding: [usize; 3],
    stride: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    /// `None` when the caller asked to skip the input gradient.
    pub input: Option<Tensor>,
    pub kernels: Tensor,
    pub biases: Vec<f64>,
}

impl ConvLayer {
    pub fn new(
        kernels: Tensor,
        biases: Vec<f64>,
        padding: [usize; 3],
        stride: [usize; 3],
    ) -> Result<Self> {
        if kernels.rank() != 5 {
            return Err(Error::dim(
                None,
                format!(
                    "conv kernels must be rank 5 [filters, channels, k0, k1, k2], got {:?}",
                    kernels.shape()
                ),
            ));
        }
        if biases.len() != kernels.shape()[0] {
            return Err(Error::dim(
                0,
                format!(
                    "{} biases for {} filters",
                    biases.len(),
                    kernels.shape()[0]
                ),
            ));
        }
        if let Some(axis) = stride.iter().position(|&s| s == 0) {
            return Err(Error::Config(format!("stride on axis {axis} must be positive")));
        }
        Ok(ConvLayer {
            kernels,
            biases,
            padding,
            stride,
        })
    }

    /// A 1D layer: `kernels` is `[filters, in_channels, k]`.
    pub fn new_1d(kernels: Tensor, biases: Vec<f64>, padding: usize, stride: usize) -> Result<Self> {
        if kernels.rank() != 3 {
            return Err(Error::dim(
                None,
                format!("1D kernels must be rank 3, got {:?}", kernels.shape()),
            ));
        }
        let s = kernels.shape().to_vec();
        let kernels = kernels.reshape([s[0], s[1], s[2], 1, 1])?;
        ConvLayer::new(kernels, biases, [padding, 0, 0], [stride, 1, 1])
    }

    pub fn filters(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn kernel_extent(&self) -> [usize; 3] {
        let s = self.kernels.shape();
        [s[2], s[3], s[4]]
    }

    pub fn padding(&self) -> [usize; 3] {
        self.padding
    }

    pub fn stride(&self) -> [usize; 3] {
        self.stride
    }

    pub fn kernels(&self) -> &Tensor {
        &self.kernels
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub(crate) fn params_mut(&mut self) -> [&mut [f64]; 2] {
        [self.kernels.data_mut(), &mut self.biases]
    }

    pub fn param_count(&self) -> usize {
        self.kernels.len() + self.biases.len()
    }

    /// Output spatial extents for the given input extents.
    pub fn output_extent(&self, input: [usize; 3]) -> Result<[usize; 3]> {
        let k = self.kernel_extent();
        let mut out = [0; 3];
        for axis in 0..3 {
            let padded = input[axis] + 2 * self.padding[axis];
            if padded < k[axis] {
                return Err(Error::dim(
                    axis + 1,
                    format!(
                        "padded extent {padded} is smaller than kernel extent {}",
                        k[axis]
                    ),
                ));
            }
            let span = padded - k[axis];
            if span % self.stride[axis] != 0 {
                return Err(Error::Config(format!(
                    "axis {}: ({padded} - {}) is not divisible by stride {}",
                    axis + 1,
                    k[axis],
                    self.stride[axis]
                )));
            }
            out[axis] = span / self.stride[axis] + 1;
        }
        Ok(out)
    }

    fn check_input(&self, input: &Tensor) -> Result<([usize; 3], [usize; 3])> {
        if input.rank() != 4 {
            return Err(Error::dim(
                None,
                format!("conv input must be rank 4 [C, d0, d1, d2], got {:?}", input.shape()),
            ));
        }
        if input.shape()[0] != self.in_channels() {
            return Err(Error::dim(
                0,
                format!(
                    "input has {} channels, layer expects {}",
                    input.shape()[0],
                    self.in_channels()
                ),
            ));
        }
        let s = input.shape();
        let dims = [s[1], s[2], s[3]];
        Ok((dims, self.output_extent(dims)?))
    }
}

struct Geometry {
    channels: usize,
    dims: [usize; 3],
    kernel: [usize; 3],
    pad: [usize; 3],
    stride: [usize; 3],
    out: [usize; 3],
}

impl Geometry {
    fn rows(&self) -> usize {
        self.channels * self.kernel.iter().product::<usize>()
    }

    fn cols(&self) -> usize {
        self.out.iter().product()
    }

    /// Calls `f(row, col, src)` for every in-bounds (row, column) cell of the
    /// unfolded matrix, `src` being the flat input index it reads.
    #[inline(always)]
    fn for_each_cell(&self, mut f: impl FnMut(usize, usize, usize)) {
        let [d0, d1, d2] = self.dims;
        let [k0, k1, k2] = self.kernel;
        let [o0n, o1n, o2n] = self.out;
        let mut row = 0;
        for c in 0..self.channels {
            for a in 0..k0 {
                for b in 0..k1 {
                    for d in 0..k2 {
                        for o0 in 0..o0n {
                            let i0 = (o0 * self.stride[0] + a) as isize - self.pad[0] as isize;
                            if i0 < 0 || i0 >= d0 as isize {
                                continue;
                            }
                            for o1 in 0..o1n {
                                let i1 =
                                    (o1 * self.stride[1] + b) as isize - self.pad[1] as isize;
                                if i1 < 0 || i1 >= d1 as isize {
                                    continue;
                                }
                                let src_base = ((c * d0 + i0 as usize) * d1 + i1 as usize) * d2;
                                let col_base = (o0 * o1n + o1) * o2n;
                                for o2 in 0..o2n {
                                    let i2 =
                                        (o2 * self.stride[2] + d) as isize - self.pad[2] as isize;
                                    if i2 < 0 || i2 >= d2 as isize {
                                        continue;
                                    }
                                    f(row, col_base + o2, src_base + i2 as usize);
                                }
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
    }

    fn im2col(&self, input: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        let mut col = vec![0.0; self.rows() * cols];
        self.for_each_cell(|r, c, src| col[r * cols + c] = input[src]);
        col
    }

    fn col2im(&self, col: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        let mut out = vec![0.0; self.channels * self.dims.iter().product::<usize>()];
        self.for_each_cell(|r, c, src| out[src] += col[r * cols + c]);
        out
    }
}

fn geometry(layer: &ConvLayer, input: &Tensor) -> Result<Geometry> {
    let (dims, out) = layer.check_input(input)?;
    Ok(Geometry {
        channels: layer.in_channels(),
        dims,
        kernel: layer.kernel_extent(),
        pad: layer.padding,
        stride: layer.stride,
        out,
    })
}

/// Affine part of a convolution layer: `[C, d0, d1, d2] -> [filters, o0, o1, o2]`.
pub fn conv3d_forward(input: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    let g = geometry(layer, input)?;
    let col = g.im2col(input.data());
    let (nf, rows, cols) = (layer.filters(), g.rows(), g.cols());
    let mut out = vec![0.0; nf * cols];
    for (f, chunk) in out.chunks_mut(cols).enumerate() {
        chunk.fill(layer.biases[f]);
    }
    gemm(nf, rows, cols, layer.kernels.data(), false, &col, false, 1.0, &mut out);
    Tensor::new([nf, g.out[0], g.out[1], g.out[2]], out)
}

/// Gradients of [`conv3d_forward`] with respect to input, kernels and biases.
pub fn conv3d_backward(input: &Tensor, layer: &ConvLayer, grad_out: &Tensor) -> Result<ConvGrads> {
    conv3d_backward_with(input, layer, grad_out, true)
}

pub(crate) fn conv3d_backward_with(
    input: &Tensor,
    layer: &ConvLayer,
    grad_out: &Tensor,
    need_input: bool,
) -> Result<ConvGrads> {
    let g = geometry(layer, input)?;
    let (nf, rows, cols) = (layer.filters(), g.rows(), g.cols());
    let expected = [nf, g.out[0], g.out[1], g.out[2]];
    if grad_out.shape() != expected {
        return Err(Error::dim(
            None,
            format!(
                "gradient shape {:?} does not match conv output {:?}",
                grad_out.shape(),
                expected
            ),
        ));
    }
    let col = g.im2col(input.data());
    let go = grad_out.data();

    let mut grad_k = vec![0.0; nf * rows];
    gemm(nf, cols, rows, go, false, &col, true, 0.0, &mut grad_k);
    let grad_b = go.chunks(cols).map(|c| c.iter().sum()).collect();

    let grad_in = if need_input {
        let mut grad_col = vec![0.0; rows * cols];
        gemm(rows, nf, cols, layer.kernels.data(), true, go, false, 0.0, &mut grad_col);
        Some(Tensor::new(input.shape(), g.col2im(&grad_col))?)
    } else {
        None
    };

    Ok(ConvGrads {
        input: grad_in,
        kernels: Tensor::new(layer.kernels.shape(), grad_k)?,
        biases: grad_b,
    })
}

fn check_1d(input: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    if input.rank() != 2 {
        return Err(Error::dim(
            None,
            format!("1D conv input must be rank 2 [C, L], got {:?}", input.shape()),
        ));
    }
    let [_, k1, k2] = layer.kernel_extent();
    if k1 != 1 || k2 != 1 || layer.padding[1] != 0 || layer.padding[2] != 0 {
        return Err(Error::Config("layer is not a 1D convolution".into()));
    }
    input.clone().reshape([input.shape()[0], input.shape()[1], 1, 1])
}

/// `[C, L] -> [filters, L']`.
pub fn conv1d_forward(input: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    let x = check_1d(input, layer)?;
    let y = conv3d_forward(&x, layer)?;
    let s = y.shape().to_vec();
    y.reshape([s[0], s[1]])
}

pub fn conv1d_backward(input: &Tensor, layer: &ConvLayer, grad_out: &Tensor) -> Result<ConvGrads> {
    let x = check_1d(input, layer)?;
    if grad_out.rank() != 2 {
        return Err(Error::dim(None, "1D conv gradient must be rank 2"));
    }
    let go = grad_out
        .clone()
        .reshape([grad_out.shape()[0], grad_out.shape()[1], 1, 1])?;
    let mut grads = conv3d_backward(&x, layer, &go)?;
    grads.input = match grads.input {
        Some(gi) => Some(gi.reshape(input.shape())?),
        None => None,
    };
    let ks = layer.kernels.shape();
    grads.kernels = grads.kernels.reshape([ks[0], ks[1], ks[2]])?;
    Ok(grads)
}
