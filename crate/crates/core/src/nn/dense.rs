use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::gemm;

/// Fully-connected layer, `weights` shaped `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: Tensor,
    biases: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weights: Tensor, biases: Vec<f64>) -> Result<Self> {
        if weights.rank() != 2 {
            return Err(Error::dim(
                None,
                format!("dense weights must be rank 2 [out, in], got {:?}", weights.shape()),
            ));
        }
        if biases.len() != weights.shape()[0] {
            return Err(Error::dim(
                0,
                format!("{} biases for {} outputs", biases.len(), weights.shape()[0]),
            ));
        }
        Ok(DenseLayer { weights, biases })
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub(crate) fn params_mut(&mut self) -> [&mut [f64]; 2] {
        [self.weights.data_mut(), &mut self.biases]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    /// Accepts `[in]` or a batch `[N, in]`.
    fn batch_rows(&self, input: &Tensor) -> Result<usize> {
        let (rows, width) = match *input.shape() {
            [w] => (1, w),
            [n, w] => (n, w),
            _ => {
                return Err(Error::dim(
                    None,
                    format!("dense input must be [in] or [N, in], got {:?}", input.shape()),
                ))
            }
        };
        if width != self.inputs() {
            return Err(Error::dim(
                input.rank() - 1,
                format!("input width {width}, layer expects {}", self.inputs()),
            ));
        }
        Ok(rows)
    }
}

/// `y = W x + b`, row by row for a batch.
pub fn dense_forward(input: &Tensor, layer: &DenseLayer) -> Result<Tensor> {
    let n = layer.batch_rows(input)?;
    let (din, dout) = (layer.inputs(), layer.outputs());
    let mut out = Vec::with_capacity(n * dout);
    for _ in 0..n {
        out.extend_from_slice(&layer.biases);
    }
    gemm(n, din, dout, input.data(), false, layer.weights.data(), true, 1.0, &mut out);
    let shape = if input.rank() == 1 { vec![dout] } else { vec![n, dout] };
    Tensor::new(shape, out)
}

/// Exact adjoint of [`dense_forward`]; parameter gradients are summed over the batch.
pub fn dense_backward(input: &Tensor, layer: &DenseLayer, grad_out: &Tensor) -> Result<DenseGrads> {
    let n = layer.batch_rows(input)?;
    let (din, dout) = (layer.inputs(), layer.outputs());
    if grad_out.len() != n * dout {
        return Err(Error::dim(
            None,
            format!(
                "gradient shape {:?} does not match dense output ({n} x {dout})",
                grad_out.shape()
            ),
        ));
    }
    let go = grad_out.data();
    let mut gw = vec![0.0; dout * din];
    gemm(dout, n, din, go, true, input.data(), false, 0.0, &mut gw);
    let mut gb = vec![0.0; dout];
    for row in go.chunks(dout) {
        for (b, g) in gb.iter_mut().zip(row) {
            *b += g;
        }
    }
    let mut gi = vec![0.0; n * din];
    gemm(n, dout, din, go, false, layer.weights.data(), false, 0.0, &mut gi);
    Ok(DenseGrads {
        input: Tensor::new(input.shape(), gi)?,
        weights: Tensor::new([dout, din], gw)?,
        biases: gb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let eye = Tensor::from_fn([4, 4], |i| if i % 5 == 0 { 1.0 } else { 0.0 });
        let layer = DenseLayer::new(eye, vec![0.0; 4]).unwrap();
        let x = Tensor::new([4], vec![1.5, -2.0, 0.0, 7.25]).unwrap();
        assert_eq!(dense_forward(&x, &layer).unwrap(), x);
    }

    #[test]
    fn batch_rows_are_independent() {
        let w = Tensor::from_fn([3, 2], |i| i as f64 - 2.0);
        let layer = DenseLayer::new(w, vec![0.5, -0.5, 1.0]).unwrap();
        let a = Tensor::new([2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::new([2], vec![-3.0, 0.5]).unwrap();
        let batch = Tensor::new([2, 2], vec![1.0, 2.0, -3.0, 0.5]).unwrap();
        let yb = dense_forward(&batch, &layer).unwrap();
        let ya = dense_forward(&a, &layer).unwrap();
        let yb2 = dense_forward(&b, &layer).unwrap();
        assert_eq!(&yb.data()[..3], ya.data());
        assert_eq!(&yb.data()[3..], yb2.data());
    }

    #[test]
    fn width_mismatch_is_dimension_error() {
        let layer = DenseLayer::new(Tensor::zeros([2, 3]), vec![0.0; 2]).unwrap();
        assert!(matches!(
            dense_forward(&Tensor::zeros([4]), &layer),
            Err(Error::Dimension { .. })
        ));
    }
}
