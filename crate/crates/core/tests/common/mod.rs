//! Independent oracles shared by the integration tests: literal nested-loop
//! convolutions and central finite-difference gradient checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqoe::nn::{
    conv1d_backward, conv1d_forward, conv3d_backward, conv3d_forward, cross_entropy, dense_backward,
    dense_forward, maxpool3d_backward, maxpool3d_forward, relu_backward, relu_forward, softmax,
    ConvLayer, DenseLayer, PoolSpec,
};
use vqoe::Tensor;

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_TOLERANCE: f64 = 1e-4;
/// Denominator floor so that gradients that are zero up to rounding are
/// compared absolutely instead of relatively.
const REL_FLOOR: f64 = 1e-7;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape.to_vec(), |_| rng.gen_range(-1.0..1.0))
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Worst relative error between `analytic` and central differences of
/// `loss` with respect to every entry of `x`.
pub fn fd_worst(x: &Tensor, analytic: &[f64], loss: impl Fn(&Tensor) -> f64) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut plus = x.clone();
        plus.data_mut()[i] += FD_STEP;
        let mut minus = x.clone();
        minus.data_mut()[i] -= FD_STEP;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(analytic[i], numeric));
    }
    worst
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Literal seven-loop convolution: for every output cell, sum kernel times
/// zero-padded input over channels and the three kernel offsets.
pub fn naive_conv3d(input: &Tensor, kernels: &Tensor, biases: &[f64], pad: [usize; 3], stride: [usize; 3]) -> Tensor {
    let (c_in, d) = (input.shape()[0], [input.shape()[1], input.shape()[2], input.shape()[3]]);
    let ks = kernels.shape();
    let (nf, k) = (ks[0], [ks[2], ks[3], ks[4]]);
    assert_eq!(ks[1], c_in);
    let o: Vec<usize> = (0..3).map(|a| (d[a] + 2 * pad[a] - k[a]) / stride[a] + 1).collect();
    let mut out = Tensor::zeros([nf, o[0], o[1], o[2]]);
    let padded = |c: usize, a: isize, b: isize, t: isize| -> f64 {
        if a < 0 || b < 0 || t < 0 || a as usize >= d[0] || b as usize >= d[1] || t as usize >= d[2] {
            0.0
        } else {
            input.get(&[c, a as usize, b as usize, t as usize])
        }
    };
    for f in 0..nf {
        for x in 0..o[0] {
            for y in 0..o[1] {
                for z in 0..o[2] {
                    let mut acc = biases[f];
                    for c in 0..c_in {
                        for i in 0..k[0] {
                            for j in 0..k[1] {
                                for p in 0..k[2] {
                                    let a = (x * stride[0] + i) as isize - pad[0] as isize;
                                    let b = (y * stride[1] + j) as isize - pad[1] as isize;
                                    let t = (z * stride[2] + p) as isize - pad[2] as isize;
                                    acc += kernels.get(&[f, c, i, j, p]) * padded(c, a, b, t);
                                }
                            }
                        }
                    }
                    out.set(&[f, x, y, z], acc);
                }
            }
        }
    }
    out
}

/// Literal 1D convolution over a `[C, L]` input with `[nf, C, K]` kernels.
pub fn naive_conv1d(input: &Tensor, kernels: &Tensor, biases: &[f64], pad: usize, stride: usize) -> Tensor {
    let (c_in, len) = (input.shape()[0], input.shape()[1]);
    let (nf, k) = (kernels.shape()[0], kernels.shape()[2]);
    let out_len = (len + 2 * pad - k) / stride + 1;
    let mut out = Tensor::zeros([nf, out_len]);
    for f in 0..nf {
        for o in 0..out_len {
            let mut acc = biases[f];
            for c in 0..c_in {
                for i in 0..k {
                    let pos = (o * stride + i) as isize - pad as isize;
                    if pos >= 0 && (pos as usize) < len {
                        acc += kernels.get(&[f, c, i]) * input.get(&[c, pos as usize]);
                    }
                }
            }
            out.set(&[f, o], acc);
        }
    }
    out
}

/// Random conv3d instance: channels, extents, kernel, padding, stride.
pub struct ConvCase {
    pub input: Tensor,
    pub kernels: Tensor,
    pub biases: Vec<f64>,
    pub pad: [usize; 3],
    pub stride: [usize; 3],
}

impl ConvCase {
    pub fn random(rng: &mut ChaCha8Rng, max_extent: usize) -> Self {
        let c = rng.gen_range(1..=3);
        let nf = rng.gen_range(1..=4);
        let mut k = [0; 3];
        let mut pad = [0; 3];
        let mut stride = [1; 3];
        let mut d = [0; 3];
        for a in 0..3 {
            k[a] = rng.gen_range(1..=3);
            pad[a] = rng.gen_range(0..=1);
            stride[a] = rng.gen_range(1..=2);
            // choose an output extent, then the input extent that yields it exactly
            let o = rng.gen_range(1..=max_extent.max(2) / stride[a]);
            d[a] = ((o - 1) * stride[a] + k[a]).saturating_sub(2 * pad[a]).max(1);
            while (d[a] + 2 * pad[a] < k[a]) || (d[a] + 2 * pad[a] - k[a]) % stride[a] != 0 {
                d[a] += 1;
            }
        }
        ConvCase {
            input: random_tensor(rng, &[c, d[0], d[1], d[2]]),
            kernels: random_tensor(rng, &[nf, c, k[0], k[1], k[2]]),
            biases: (0..nf).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            pad,
            stride,
        }
    }

    pub fn layer(&self, kernels: &Tensor) -> ConvLayer {
        ConvLayer::new(kernels.clone(), self.biases.clone(), self.pad, self.stride).unwrap()
    }
}

pub fn gradcheck_conv3d(seed: u64) -> f64 {
    let mut r = rng(seed);
    let case = ConvCase::random(&mut r, 5);
    let layer = case.layer(&case.kernels);
    let out = conv3d_forward(&case.input, &layer).unwrap();
    let proj = random_tensor(&mut r, out.shape());
    let g = conv3d_backward(&case.input, &layer, &proj).unwrap();
    let loss_x = |x: &Tensor| dot(&conv3d_forward(x, &layer).unwrap(), &proj);
    let loss_k = |k: &Tensor| dot(&conv3d_forward(&case.input, &case.layer(k)).unwrap(), &proj);
    let b = Tensor::new([case.biases.len()], case.biases.clone()).unwrap();
    let loss_b = |b: &Tensor| {
        let l = ConvLayer::new(case.kernels.clone(), b.data().to_vec(), case.pad, case.stride).unwrap();
        dot(&conv3d_forward(&case.input, &l).unwrap(), &proj)
    };
    fd_worst(&case.input, g.input.as_ref().unwrap().data(), loss_x)
        .max(fd_worst(&case.kernels, g.kernels.data(), loss_k))
        .max(fd_worst(&b, &g.biases, loss_b))
}

pub fn gradcheck_conv1d(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (c, nf, k) = (r.gen_range(1..=3), r.gen_range(1..=4), r.gen_range(1..=3));
    let pad = r.gen_range(0..=1);
    let len = r.gen_range(k.max(3)..=10);
    let input = random_tensor(&mut r, &[c, len]);
    let kernels = random_tensor(&mut r, &[nf, c, k]);
    let biases: Vec<f64> = (0..nf).map(|_| r.gen_range(-1.0..1.0)).collect();
    let layer_with = |k: &Tensor, b: &[f64]| ConvLayer::new_1d(k.clone(), b.to_vec(), pad, 1).unwrap();
    let layer = layer_with(&kernels, &biases);
    let out = conv1d_forward(&input, &layer).unwrap();
    let proj = random_tensor(&mut r, out.shape());
    let g = conv1d_backward(&input, &layer, &proj).unwrap();
    let bt = Tensor::new([nf], biases.clone()).unwrap();
    fd_worst(&input, g.input.as_ref().unwrap().data(), |x| dot(&conv1d_forward(x, &layer).unwrap(), &proj))
        .max(fd_worst(&kernels, g.kernels.data(), |k| {
            dot(&conv1d_forward(&input, &layer_with(k, &biases)).unwrap(), &proj)
        }))
        .max(fd_worst(&bt, &g.biases, |b| {
            dot(&conv1d_forward(&input, &layer_with(&kernels, b.data())).unwrap(), &proj)
        }))
}

/// Input whose entries are a shuffled ladder with spacing 0.01, so every
/// pooling window has a strict maximum well beyond the difference step.
pub fn gradcheck_maxpool(seed: u64) -> f64 {
    let mut r = rng(seed);
    let window = [r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=2)];
    let shape = [r.gen_range(1..=2), r.gen_range(2..=5), r.gen_range(2..=5), r.gen_range(2..=4)];
    let n: usize = shape.iter().product();
    let mut values: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
    rand::seq::SliceRandom::shuffle(values.as_mut_slice(), &mut r);
    let input = Tensor::new(shape, values).unwrap();
    let spec = PoolSpec::new(window).unwrap();
    let (out, idx) = maxpool3d_forward(&input, &spec).unwrap();
    let proj = random_tensor(&mut r, out.shape());
    let g = maxpool3d_backward(&proj, &idx, input.shape()).unwrap();
    fd_worst(&input, g.data(), |x| dot(&maxpool3d_forward(x, &spec).unwrap().0, &proj))
}

pub fn gradcheck_dense(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (batch, inputs, outputs) = (r.gen_range(1..=4), r.gen_range(1..=6), r.gen_range(1..=5));
    let x = random_tensor(&mut r, &[batch, inputs]);
    let w = random_tensor(&mut r, &[outputs, inputs]);
    let b: Vec<f64> = (0..outputs).map(|_| r.gen_range(-1.0..1.0)).collect();
    let layer = DenseLayer::new(w.clone(), b.clone()).unwrap();
    let out = dense_forward(&x, &layer).unwrap();
    let proj = random_tensor(&mut r, out.shape());
    let g = dense_backward(&x, &layer, &proj).unwrap();
    let bt = Tensor::new([outputs], b.clone()).unwrap();
    fd_worst(&x, g.input.data(), |x| dot(&dense_forward(x, &layer).unwrap(), &proj))
        .max(fd_worst(&w, g.weights.data(), |w| {
            dot(&dense_forward(&x, &DenseLayer::new(w.clone(), b.clone()).unwrap()).unwrap(), &proj)
        }))
        .max(fd_worst(&bt, &g.biases, |b| {
            dot(&dense_forward(&x, &DenseLayer::new(w.clone(), b.data().to_vec()).unwrap()).unwrap(), &proj)
        }))
}

/// Entries kept at least 0.05 away from the kink at zero.
pub fn gradcheck_relu(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = r.gen_range(1..=20);
    let x = Tensor::from_fn([n], |_| {
        let m = r.gen_range(0.05..1.0);
        if r.gen_bool(0.5) {
            m
        } else {
            -m
        }
    });
    let proj = random_tensor(&mut r, &[n]);
    let g = relu_backward(&x, &proj).unwrap();
    fd_worst(&x, g.data(), |x| dot(&relu_forward(x), &proj))
}

pub fn gradcheck_softmax_ce(seed: u64) -> f64 {
    let mut r = rng(seed);
    let k = r.gen_range(2..=6);
    let z = Tensor::from_fn([k], |_| r.gen_range(-3.0..3.0));
    let class = r.gen_range(0..k);
    let (_, g) = cross_entropy(&softmax(z.data()).unwrap(), class).unwrap();
    fd_worst(&z, &g, |z| cross_entropy(&softmax(z.data()).unwrap(), class).unwrap().0)
}
