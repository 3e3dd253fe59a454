//! Sequential CNN: layer stack, batched forward/backward, parameter access.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Exec;
use crate::error::{Error, Result};
use crate::nn::{
    self, conv3d_backward_with, conv3d_forward, cross_entropy, dense_backward, dense_forward,
    maxpool3d_backward, maxpool3d_forward, relu_backward, relu_forward, softmax, ConvLayer,
    DenseLayer, PoolSpec,
};
use crate::tensor::Tensor;

pub const KERNEL_EDGE: usize = 3;
pub const DEFAULT_FC_SIZES: [usize; 2] = [1024, 512];

fn default_fc_sizes() -> Vec<usize> {
    DEFAULT_FC_SIZES.to_vec()
}

/// Architecture of the patch classifier: `num_conv_layers` blocks of
/// 3x3x3 convolution, ReLU and max-pooling with filter counts doubling per
/// block, then fully-connected ReLU layers and a softmax head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub num_conv_layers: usize,
    pub first_layer_filters: usize,
    #[serde(default = "default_fc_sizes")]
    pub fc_sizes: Vec<usize>,
    pub num_classes: usize,
}

impl ModelConfig {
    pub fn new(num_conv_layers: usize, first_layer_filters: usize, num_classes: usize) -> Self {
        ModelConfig {
            num_conv_layers,
            first_layer_filters,
            fc_sizes: default_fc_sizes(),
            num_classes,
        }
    }

    pub fn with_fc_sizes(mut self, fc_sizes: Vec<usize>) -> Self {
        self.fc_sizes = fc_sizes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.num_conv_layers) {
            return Err(Error::Config(format!(
                "num_conv_layers must be 2 or 3, got {}",
                self.num_conv_layers
            )));
        }
        if self.first_layer_filters == 0 || self.num_classes == 0 {
            return Err(Error::Config("filter and class counts must be positive".into()));
        }
        if self.fc_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("fully-connected sizes must be positive".into()));
        }
        Ok(())
    }

    /// Pool window after conv block `index`: no temporal pooling after the first.
    pub fn pool_window(index: usize) -> [usize; 3] {
        if index == 0 {
            [2, 2, 1]
        } else {
            [2, 2, 2]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    Relu,
    MaxPool(PoolSpec),
    Flatten,
    Dense(DenseLayer),
}

impl Layer {
    fn name(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Relu => "relu",
            Layer::MaxPool(_) => "maxpool",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
        }
    }
}

/// Feedforward classifier over inputs of a fixed `[C, d0, d1, d2]` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layers: Vec<Layer>,
    input_shape: [usize; 4],
    /// Activation shape after each layer; `[n]` once flattened.
    shapes: Vec<Vec<usize>>,
}

/// Conv/pool blocks. Each entry is (filters, kernel, padding, pool window).
struct Blueprint {
    input_shape: [usize; 4],
    convs: Vec<(usize, [usize; 3], [usize; 3], [usize; 3])>,
    fc_sizes: Vec<usize>,
    num_classes: usize,
}

fn glorot(rng: &mut ChaCha8Rng, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-limit..=limit)).collect()
}

impl Blueprint {
    fn build(&self, seed: u64) -> Result<Model> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let [mut channels, d0, d1, d2] = self.input_shape;
        let mut dims = [d0, d1, d2];
        for &(filters, kernel, padding, window) in &self.convs {
            let volume: usize = kernel.iter().product();
            let kshape = [filters, channels, kernel[0], kernel[1], kernel[2]];
            let n: usize = kshape.iter().product();
            let weights = glorot(&mut rng, n, channels * volume, filters * volume);
            let conv = ConvLayer::new(Tensor::new(kshape, weights)?, vec![0.0; filters], padding, [1; 3])?;
            dims = conv.output_extent(dims).map_err(to_config)?;
            let pool = PoolSpec::new(window)?;
            dims = pool.output_extent(dims).map_err(to_config)?;
            layers.push(Layer::Conv(conv));
            layers.push(Layer::Relu);
            layers.push(Layer::MaxPool(pool));
            channels = filters;
        }
        layers.push(Layer::Flatten);
        let mut width = channels * dims.iter().product::<usize>();
        let mut sizes = self.fc_sizes.clone();
        sizes.push(self.num_classes);
        for (i, &out) in sizes.iter().enumerate() {
            let w = glorot(&mut rng, out * width, width, out);
            layers.push(Layer::Dense(DenseLayer::new(Tensor::new([out, width], w)?, vec![0.0; out])?));
            if i + 1 < sizes.len() {
                layers.push(Layer::Relu);
            }
            width = out;
        }
        Model::from_layers(layers, self.input_shape)
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Dimension { message, .. } => {
            Error::Config(format!("architecture does not fit the input: {message}"))
        }
        other => other,
    }
}

/// 3D patch classifier for `k x k x k` single-channel patches.
pub fn build_model(config: &ModelConfig, patch_k: usize, seed: u64) -> Result<Model> {
    config.validate()?;
    if patch_k == 0 {
        return Err(Error::Config("patch edge must be positive".into()));
    }
    let pad = KERNEL_EDGE / 2;
    let convs = (0..config.num_conv_layers)
        .map(|i| {
            (
                config.first_layer_filters << i,
                [KERNEL_EDGE; 3],
                [pad; 3],
                ModelConfig::pool_window(i),
            )
        })
        .collect();
    Blueprint {
        input_shape: [1, patch_k, patch_k, patch_k],
        convs,
        fc_sizes: config.fc_sizes.clone(),
        num_classes: config.num_classes,
    }
    .build(seed)
}

/// 1D counterpart used by the pre-trained aggregation strategy: same block
/// structure with length-3 kernels and pooling by 2 along the sequence.
pub(crate) fn build_1d(
    filters: &[usize],
    fc_sizes: &[usize],
    num_classes: usize,
    input_len: usize,
    seed: u64,
) -> Result<Model> {
    if filters.is_empty() || filters.iter().any(|&f| f == 0) || num_classes == 0 {
        return Err(Error::Config("1D model needs positive filter and class counts".into()));
    }
    if fc_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Config("fully-connected sizes must be positive".into()));
    }
    let pad = KERNEL_EDGE / 2;
    let convs = filters
        .iter()
        .map(|&f| (f, [KERNEL_EDGE, 1, 1], [pad, 0, 0], [2, 1, 1]))
        .collect();
    Blueprint {
        input_shape: [1, input_len, 1, 1],
        convs,
        fc_sizes: fc_sizes.to_vec(),
        num_classes,
    }
    .build(seed)
}

enum Act {
    Samples(Vec<Tensor>),
    Batch(Tensor),
}

impl Act {
    fn samples(&self) -> &[Tensor] {
        match self {
            Act::Samples(s) => s,
            Act::Batch(_) => unreachable!("layer expects per-sample activations"),
        }
    }

    fn batch(&self) -> &Tensor {
        match self {
            Act::Batch(b) => b,
            Act::Samples(_) => unreachable!("layer expects a batch matrix"),
        }
    }
}

struct Trace {
    /// Input activation of each layer.
    inputs: Vec<Act>,
    /// Argmax indices of each pooling layer, per sample.
    argmax: Vec<Option<Vec<Vec<usize>>>>,
    logits: Tensor,
}

/// Loss and gradients of one batch.
#[derive(Debug, Clone)]
pub struct BatchGrads {
    pub mean_loss: f64,
    pub correct: usize,
    /// Aligned with [`Model::param_buffers_mut`].
    pub grads: Vec<Vec<f64>>,
}

impl Model {
    pub fn from_layers(layers: Vec<Layer>, input_shape: [usize; 4]) -> Result<Self> {
        let mut shapes = Vec::with_capacity(layers.len());
        let mut shape = input_shape.to_vec();
        let mut flat = false;
        for (i, layer) in layers.iter().enumerate() {
            shape = match layer {
                Layer::Conv(c) if !flat => {
                    if shape[0] != c.in_channels() {
                        return Err(Error::dim(0, format!("layer {i}: channel mismatch")));
                    }
                    let o = c.output_extent([shape[1], shape[2], shape[3]])?;
                    vec![c.filters(), o[0], o[1], o[2]]
                }
                Layer::MaxPool(p) if !flat => {
                    let o = p.output_extent([shape[1], shape[2], shape[3]])?;
                    vec![shape[0], o[0], o[1], o[2]]
                }
                Layer::Relu => shape,
                Layer::Flatten if !flat => {
                    flat = true;
                    vec![shape.iter().product()]
                }
                Layer::Dense(d) if flat => {
                    if shape[0] != d.inputs() {
                        return Err(Error::dim(
                            None,
                            format!("layer {i}: dense expects {} inputs, got {}", d.inputs(), shape[0]),
                        ));
                    }
                    vec![d.outputs()]
                }
                other => {
                    return Err(Error::Config(format!(
                        "layer {i} ({}) is not valid at this position",
                        other.name()
                    )))
                }
            };
            shapes.push(shape.clone());
        }
        if !flat || shape.len() != 1 {
            return Err(Error::Config("model must end in flattened dense layers".into()));
        }
        Ok(Model {
            layers,
            input_shape,
            shapes,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_shape(&self) -> [usize; 4] {
        self.input_shape
    }

    pub fn num_classes(&self) -> usize {
        self.shapes.last().expect("non-empty model")[0]
    }

    /// Total trainable coefficient count (kernels, weights and biases).
    pub fn param_count(&self) -> usize {
        self.param_buffer_sizes().iter().sum()
    }

    pub fn param_buffer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => sizes.extend([c.kernels().len(), c.biases().len()]),
                Layer::Dense(d) => sizes.extend([d.weights().len(), d.biases().len()]),
                _ => {}
            }
        }
        sizes
    }

    /// Kernels then biases of each parametrized layer, in layer order.
    pub fn param_buffers_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) => out.extend(c.params_mut()),
                Layer::Dense(d) => out.extend(d.params_mut()),
                _ => {}
            }
        }
        out
    }

    pub fn param_tensors(&self) -> Vec<Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => {
                    out.push(c.kernels().clone());
                    out.push(Tensor::new([c.biases().len()], c.biases().to_vec()).unwrap());
                }
                Layer::Dense(d) => {
                    out.push(d.weights().clone());
                    out.push(Tensor::new([d.biases().len()], d.biases().to_vec()).unwrap());
                }
                _ => {}
            }
        }
        out
    }

    /// All trainable coefficients concatenated in [`Model::param_buffers_mut`] order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.append_params(&mut out);
        out
    }

    pub fn append_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => {
                    out.extend_from_slice(c.kernels().data());
                    out.extend_from_slice(c.biases());
                }
                Layer::Dense(d) => {
                    out.extend_from_slice(d.weights().data());
                    out.extend_from_slice(d.biases());
                }
                _ => {}
            }
        }
    }

    /// Overwrites the parameters from tensors in [`Model::param_tensors`] order.
    pub fn load_param_tensors(&mut self, tensors: &[Tensor]) -> Result<()> {
        let expected = self.param_tensors();
        if expected.len() != tensors.len() {
            return Err(Error::dim(
                None,
                format!("model has {} parameter tensors, file has {}", expected.len(), tensors.len()),
            ));
        }
        for (i, (e, t)) in expected.iter().zip(tensors).enumerate() {
            if e.shape() != t.shape() {
                return Err(Error::dim(
                    None,
                    format!("parameter tensor {i}: expected {:?}, found {:?}", e.shape(), t.shape()),
                ));
            }
        }
        for (buf, t) in self.param_buffers_mut().into_iter().zip(tensors) {
            buf.copy_from_slice(t.data());
        }
        Ok(())
    }

    pub fn save(&self, weights: &Path, sidecar: &Path) -> Result<()> {
        let tensors = self.param_tensors();
        let refs: Vec<&Tensor> = tensors.iter().collect();
        nn::serialize::write_weights(weights, &refs)?;
        std::fs::write(sidecar, self.describe()).map_err(|e| Error::io(sidecar, e))
    }

    pub fn load_weights(&mut self, weights: &Path) -> Result<()> {
        let tensors = nn::serialize::read_weights(weights)?;
        self.load_param_tensors(&tensors)
    }

    /// Human-readable layer listing, one line per layer, noting which
    /// tensors of the weight file each parametrized layer owns.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let fmt3 = |a: [usize; 3]| format!("{}x{}x{}", a[0], a[1], a[2]);
        let _ = writeln!(s, "# input {:?}; {} trainable coefficients", self.input_shape, self.param_count());
        let mut tensor = 0;
        for (i, (layer, shape)) in self.layers.iter().zip(&self.shapes).enumerate() {
            let detail = match layer {
                Layer::Conv(c) => {
                    let d = format!(
                        "filters={} in_channels={} kernel={} padding={} stride={} tensors={},{}",
                        c.filters(),
                        c.in_channels(),
                        fmt3(c.kernel_extent()),
                        fmt3(c.padding()),
                        fmt3(c.stride()),
                        tensor,
                        tensor + 1
                    );
                    tensor += 2;
                    d
                }
                Layer::Dense(d) => {
                    let s = format!(
                        "inputs={} outputs={} tensors={},{}",
                        d.inputs(),
                        d.outputs(),
                        tensor,
                        tensor + 1
                    );
                    tensor += 2;
                    s
                }
                Layer::MaxPool(p) => format!("window={}", fmt3(p.window)),
                Layer::Relu | Layer::Flatten => String::new(),
            };
            let _ = writeln!(s, "{i} {} {detail} -> {shape:?}", layer.name());
        }
        let _ = writeln!(s, "{} softmax -> [{}]", self.layers.len(), self.num_classes());
        s
    }

    fn check_inputs(&self, inputs: &[&Tensor]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::dim(None, "empty batch"));
        }
        for (i, x) in inputs.iter().enumerate() {
            if x.shape() != self.input_shape {
                return Err(Error::dim(
                    None,
                    format!("sample {i} has shape {:?}, model expects {:?}", x.shape(), self.input_shape),
                ));
            }
        }
        Ok(())
    }

    fn run(&self, inputs: &[&Tensor], exec: &Exec, keep: bool) -> Result<Trace> {
        self.check_inputs(inputs)?;
        let mut act = Act::Samples(inputs.iter().map(|&t| t.clone()).collect());
        let mut trace_inputs = Vec::new();
        let mut argmax = Vec::new();
        for layer in &self.layers {
            let mut pool_idx = None;
            let next = match layer {
                Layer::Conv(c) => {
                    let outs = exec.map(act.samples(), |_, x| conv3d_forward(x, c));
                    Act::Samples(outs.into_iter().collect::<Result<_>>()?)
                }
                Layer::Relu => match &act {
                    Act::Samples(s) => Act::Samples(s.iter().map(relu_forward).collect()),
                    Act::Batch(b) => Act::Batch(relu_forward(b)),
                },
                Layer::MaxPool(p) => {
                    let outs = exec.map(act.samples(), |_, x| maxpool3d_forward(x, p));
                    let mut ys = Vec::with_capacity(outs.len());
                    let mut idx = Vec::with_capacity(outs.len());
                    for o in outs {
                        let (y, i) = o?;
                        ys.push(y);
                        idx.push(i);
                    }
                    pool_idx = Some(idx);
                    Act::Samples(ys)
                }
                Layer::Flatten => {
                    let s = act.samples();
                    let width = s[0].len();
                    let mut data = Vec::with_capacity(width * s.len());
                    for t in s {
                        data.extend_from_slice(t.data());
                    }
                    Act::Batch(Tensor::new([s.len(), width], data)?)
                }
                Layer::Dense(d) => Act::Batch(dense_forward(act.batch(), d)?),
            };
            if keep {
                trace_inputs.push(act);
                argmax.push(pool_idx);
            }
            act = next;
        }
        Ok(Trace {
            inputs: trace_inputs,
            argmax,
            logits: match act {
                Act::Batch(b) => b,
                Act::Samples(_) => unreachable!("model ends in dense layers"),
            },
        })
    }

    /// Logits `[N, classes]` for a batch.
    pub fn logits(&self, inputs: &[&Tensor], exec: &Exec) -> Result<Tensor> {
        Ok(self.run(inputs, exec, false)?.logits)
    }

    /// Class probabilities per sample.
    pub fn predict_proba(&self, inputs: &[&Tensor], exec: &Exec) -> Result<Vec<Vec<f64>>> {
        let logits = self.logits(inputs, exec)?;
        logits
            .data()
            .chunks(self.num_classes())
            .map(softmax)
            .collect()
    }

    /// Mean cross-entropy over the batch and its exact gradient for every
    /// parameter buffer. Per-sample contributions are reduced in batch order.
    pub fn loss_and_grads(&self, inputs: &[&Tensor], labels: &[usize], exec: &Exec) -> Result<BatchGrads> {
        if inputs.len() != labels.len() {
            return Err(Error::dim(None, format!("{} inputs but {} labels", inputs.len(), labels.len())));
        }
        let trace = self.run(inputs, exec, true)?;
        let n = inputs.len();
        let classes = self.num_classes();
        let scale = 1.0 / n as f64;
        let mut total_loss = 0.0;
        let mut correct = 0;
        let mut dlogits = Vec::with_capacity(n * classes);
        for (row, &label) in trace.logits.data().chunks(classes).zip(labels) {
            let p = softmax(row)?;
            if crate::tensor::argmax(&p) == label {
                correct += 1;
            }
            let (loss, g) = cross_entropy(&p, label)?;
            total_loss += loss;
            dlogits.extend(g.into_iter().map(|v| v * scale));
        }

        let mut grads_rev: Vec<Vec<f64>> = Vec::new();
        let mut grad = Act::Batch(Tensor::new([n, classes], dlogits)?);
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.inputs[i];
            grad = match layer {
                Layer::Dense(d) => {
                    let g = dense_backward(input.batch(), d, grad.batch())?;
                    grads_rev.push(g.biases);
                    grads_rev.push(g.weights.into_data());
                    Act::Batch(g.input)
                }
                Layer::Relu => match (input, &grad) {
                    (Act::Batch(x), Act::Batch(g)) => Act::Batch(relu_backward(x, g)?),
                    (Act::Samples(xs), Act::Samples(gs)) => Act::Samples(
                        xs.iter().zip(gs).map(|(x, g)| relu_backward(x, g)).collect::<Result<_>>()?,
                    ),
                    _ => return Err(Error::Internal("relu activation/gradient kind mismatch".into())),
                },
                Layer::Flatten => {
                    let xs = input.samples();
                    let g = grad.batch();
                    let width = xs[0].len();
                    Act::Samples(
                        xs.iter()
                            .zip(g.data().chunks(width))
                            .map(|(x, gr)| Tensor::new(x.shape(), gr.to_vec()))
                            .collect::<Result<_>>()?,
                    )
                }
                Layer::MaxPool(_) => {
                    let idx = trace.argmax[i].as_ref().expect("pool trace");
                    let xs = input.samples();
                    let gs = match &grad {
                        Act::Samples(g) => g,
                        Act::Batch(_) => unreachable!(),
                    };
                    Act::Samples(
                        gs.iter()
                            .zip(idx)
                            .zip(xs)
                            .map(|((g, ix), x)| maxpool3d_backward(g, ix, x.shape()))
                            .collect::<Result<_>>()?,
                    )
                }
                Layer::Conv(c) => {
                    let xs = input.samples();
                    let gs = match &grad {
                        Act::Samples(g) => g,
                        Act::Batch(_) => unreachable!(),
                    };
                    let need_input = i > 0;
                    let pairs: Vec<(&Tensor, &Tensor)> = xs.iter().zip(gs.iter()).collect();
                    let per_sample = exec.map(&pairs, |_, (x, g)| conv3d_backward_with(x, c, g, need_input));
                    let mut gk = vec![0.0; c.kernels().len()];
                    let mut gb = vec![0.0; c.filters()];
                    let mut gin = Vec::with_capacity(per_sample.len());
                    for r in per_sample {
                        let r = r?;
                        for (a, b) in gk.iter_mut().zip(r.kernels.data()) {
                            *a += b;
                        }
                        for (a, b) in gb.iter_mut().zip(&r.biases) {
                            *a += b;
                        }
                        if let Some(g) = r.input {
                            gin.push(g);
                        }
                    }
                    grads_rev.push(gb);
                    grads_rev.push(gk);
                    Act::Samples(gin)
                }
            };
        }
        grads_rev.reverse();
        Ok(BatchGrads {
            mean_loss: total_loss * scale,
            correct,
            grads: grads_rev,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_layer_shapes_and_counts() {
        let cfg = ModelConfig::new(2, 16, 3);
        let m = build_model(&cfg, 16, 0).unwrap();
        let convs: Vec<&ConvLayer> = m
            .layers()
            .iter()
            .filter_map(|l| match l {
                Layer::Conv(c) => Some(c),
                _ => None,
            })
            .collect();
        assert_eq!(convs[0].kernels().shape(), &[16, 1, 3, 3, 3]);
        assert_eq!(convs[1].kernels().shape(), &[32, 16, 3, 3, 3]);
        assert_eq!(convs[0].param_count(), 448);
        let dense: Vec<[usize; 2]> = m
            .layers()
            .iter()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some([d.inputs(), d.outputs()]),
                _ => None,
            })
            .collect();
        assert_eq!(dense, [[4096, 1024], [1024, 512], [512, 3]]);
        assert_eq!(m.shapes[5], vec![32, 4, 4, 8]);
        let expected = 448 + (32 * 16 * 27 + 32) + (4096 * 1024 + 1024) + (1024 * 512 + 512) + (512 * 3 + 3);
        assert_eq!(m.param_count(), expected);
    }

    #[test]
    fn three_layer_pool_schedule() {
        let m = build_model(&ModelConfig::new(3, 2, 3).with_fc_sizes(vec![8]), 16, 0).unwrap();
        let pooled: Vec<&Vec<usize>> = m
            .layers()
            .iter()
            .zip(&m.shapes)
            .filter(|(l, _)| matches!(l, Layer::MaxPool(_)))
            .map(|(_, s)| s)
            .collect();
        assert_eq!(pooled, [&vec![2, 8, 8, 16], &vec![4, 4, 4, 8], &vec![8, 2, 2, 4]]);
    }

    #[test]
    fn too_small_patch_is_config_error() {
        let err = build_model(&ModelConfig::new(3, 2, 3), 4, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(build_model(&ModelConfig::new(4, 2, 3), 16, 0).is_err());
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let cfg = ModelConfig::new(2, 2, 3).with_fc_sizes(vec![8, 4]);
        let a = build_model(&cfg, 8, 42).unwrap();
        let b = build_model(&cfg, 8, 42).unwrap();
        let c = build_model(&cfg, 8, 43).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        assert_ne!(a.flat_params(), c.flat_params());
    }

    #[test]
    fn init_respects_glorot_bounds_and_zero_biases() {
        let m = build_model(&ModelConfig::new(2, 4, 3).with_fc_sizes(vec![8]), 8, 1).unwrap();
        let limit = (6.0f64 / (27.0 + 4.0 * 27.0)).sqrt();
        match &m.layers()[0] {
            Layer::Conv(c) => {
                assert!(c.kernels().data().iter().all(|v| v.abs() <= limit));
                assert!(c.biases().iter().all(|&b| b == 0.0));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn describe_lists_every_layer() {
        let m = build_model(&ModelConfig::new(2, 2, 3).with_fc_sizes(vec![8]), 8, 1).unwrap();
        let text = m.describe();
        assert_eq!(text.lines().count(), 1 + m.layers().len() + 1);
        assert!(text.contains("conv filters=2 in_channels=1 kernel=3x3x3"));
    }
}
