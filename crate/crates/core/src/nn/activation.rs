use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Probability floor inside the cross-entropy logarithm.
pub const PROB_CLIP: f64 = 1e-12;

pub fn relu_forward(input: &Tensor) -> Tensor {
    // NaN passes through so that a diverged activation stays visible
    let data = input.data().iter().map(|&v| if v > 0.0 || v.is_nan() { v } else { 0.0 }).collect();
    Tensor::new(input.shape(), data).expect("shape preserved")
}

/// Passes the gradient where the forward input was strictly positive.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if input.shape() != grad_out.shape() {
        return Err(Error::dim(
            None,
            format!(
                "relu gradient shape {:?} does not match input {:?}",
                grad_out.shape(),
                input.shape()
            ),
        ));
    }
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape(), data)
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::dim(None, "softmax of an empty vector"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Categorical cross-entropy of softmax output `probs` against `true_class`.
///
/// Returns the loss and its gradient with respect to the logits that
/// produced `probs`, i.e. `p - onehot(true_class)`.
pub fn cross_entropy(probs: &[f64], true_class: usize) -> Result<(f64, Vec<f64>)> {
    if true_class >= probs.len() {
        return Err(Error::Label(format!(
            "class {true_class} out of range for {} classes",
            probs.len()
        )));
    }
    let loss = -(probs[true_class] + PROB_CLIP).ln();
    let mut grad = probs.to_vec();
    grad[true_class] -= 1.0;
    // clamps the tiny negative value at p = 1 without hiding a NaN
    Ok((if loss < 0.0 { 0.0 } else { loss }, grad))
}
