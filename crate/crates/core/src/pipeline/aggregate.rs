//! Sequence-level labels from patch-level evidence.
//!
//! Two strategies are provided. Majority voting takes the most frequent
//! patch prediction. The weight-snapshot strategy fine-tunes a freshly
//! initialized 3D network one patch at a time, records every coefficient
//! after each step, and classifies the resulting vector with a 1D network.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_1d, build_model, cube_to_input, train, EpochStats, Example, Exec, Model, ModelConfig, TrainConfig};
use crate::dataset::{cube_at, PatchSpec, VideoVolume};
use crate::error::{Error, Result};
use crate::optim::{Optimizer, OptimizerConfig};
use crate::tensor::Tensor;

/// Most frequent class; ties go to the smallest class index.
pub fn majority_vote(labels: &[usize]) -> Result<usize> {
    let Some(&max) = labels.iter().max() else {
        return Err(Error::Aggregation("cannot vote over zero patch labels".into()));
    };
    let mut counts = vec![0usize; max + 1];
    for &l in labels {
        counts[l] += 1;
    }
    let best = *counts.iter().max().expect("non-empty");
    Ok(counts.iter().position(|&c| c == best).expect("present"))
}

/// Concatenated coefficient snapshots `[W_0, .., W_{P-1}]`, each of length
/// `coefficients`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub patches: usize,
    pub coefficients: usize,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Snapshot taken after step `p`.
    pub fn snapshot(&self, p: usize) -> &[f64] {
        &self.values[p * self.coefficients..(p + 1) * self.coefficients]
    }

    /// Average-pools the values down to at most `cap` entries. Bin `i`
    /// covers `[floor(i*L/cap), floor((i+1)*L/cap))`; with `None` or a cap
    /// at least the length, the values are returned unchanged.
    pub fn pooled(&self, cap: Option<usize>) -> Vec<f64> {
        average_pool(&self.values, cap)
    }
}

pub(crate) fn average_pool(values: &[f64], cap: Option<usize>) -> Vec<f64> {
    let n = values.len();
    match cap {
        Some(c) if c > 0 && c < n => (0..c)
            .map(|i| {
                let (a, b) = (i * n / c, (i + 1) * n / c);
                values[a..b].iter().sum::<f64>() / (b - a) as f64
            })
            .collect(),
        _ => values.to_vec(),
    }
}

/// Grid cells visited by the feature extractor: distinct cells in random
/// order when the grid is large enough, otherwise drawn with replacement.
fn sample_cells(grid: (usize, usize, usize), count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
    let (nx, ny, nt) = grid;
    let cells = nx * ny * nt;
    let cell = |i: usize| (i / (ny * nt), (i / nt) % ny, i % nt);
    if cells >= count {
        index::sample(rng, cells, count).into_iter().map(cell).collect()
    } else {
        (0..count).map(|_| cell(rng.gen_range(0..cells))).collect()
    }
}

/// Builds the weight-snapshot feature vector of one video.
///
/// A model is initialized from `seed`, then for each of `patches` sampled
/// cubes one optimizer step is taken towards `target_class` and all
/// trainable coefficients are appended. The optimizer state carries over
/// from patch to patch. A zero learning rate is accepted.
pub fn extract_feature_vector(
    video: &VideoVolume,
    model_config: &ModelConfig,
    patch_spec: &PatchSpec,
    patches: usize,
    optimizer: &OptimizerConfig,
    target_class: usize,
    seed: u64,
) -> Result<FeatureVector> {
    if patches == 0 {
        return Err(Error::Config("at least one patch per video is required".into()));
    }
    optimizer.validate(true)?;
    if target_class >= model_config.num_classes {
        return Err(Error::Label(format!(
            "target class {target_class} outside {} classes",
            model_config.num_classes
        )));
    }
    let grid = patch_spec.grid(video)?;
    let mut model = build_model(model_config, patch_spec.k, seed)?;
    let coefficients = model.param_count();
    let mut opt = Optimizer::new(*optimizer, &model.param_buffer_sizes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let exec = Exec::single();
    let mut values = Vec::with_capacity(patches * coefficients);
    for pos in sample_cells(grid, patches, &mut rng) {
        let input = cube_to_input(&cube_at(video, patch_spec.k, pos))?;
        let g = model.loss_and_grads(&[&input], &[target_class], &exec)?;
        let grads: Vec<&[f64]> = g.grads.iter().map(Vec::as_slice).collect();
        opt.step(&mut model.param_buffers_mut(), &grads)?;
        model.append_params(&mut values);
    }
    Ok(FeatureVector {
        values,
        patches,
        coefficients,
    })
}

fn default_filters() -> Vec<usize> {
    vec![64, 128, 256]
}

fn default_fc() -> Vec<usize> {
    super::DEFAULT_FC_SIZES.to_vec()
}

fn default_cap() -> Option<usize> {
    Some(256)
}

/// 1D sequence classifier over (pooled) feature vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregatorConfig {
    #[serde(default = "default_filters")]
    pub filters: Vec<usize>,
    #[serde(default = "default_fc")]
    pub fc_sizes: Vec<usize>,
    pub num_classes: usize,
    /// Average-pool inputs to at most this many entries; `None` keeps the
    /// full length.
    #[serde(default = "default_cap")]
    pub input_cap: Option<usize>,
}

impl AggregatorConfig {
    pub fn new(num_classes: usize) -> Self {
        AggregatorConfig {
            filters: default_filters(),
            fc_sizes: default_fc(),
            num_classes,
            input_cap: default_cap(),
        }
    }

    /// Network input `[1, L, 1, 1]` for one feature vector.
    pub fn input(&self, vector: &FeatureVector) -> Result<Tensor> {
        let v = vector.pooled(self.input_cap);
        Tensor::new([1, v.len(), 1, 1], v)
    }
}

/// One example per video, with the video id as item and a pooled
/// `[1, L, 1, 1]` input. All vectors must share one length.
pub fn aggregator_examples(
    vectors: &[FeatureVector],
    labels: &[usize],
    ids: &[String],
    config: &AggregatorConfig,
) -> Result<Vec<Example>> {
    if vectors.is_empty() {
        return Err(Error::Config("no feature vectors to train on".into()));
    }
    if labels.len() != vectors.len() || ids.len() != vectors.len() {
        return Err(Error::dim(
            None,
            format!("{} vectors, {} labels, {} ids", vectors.len(), labels.len(), ids.len()),
        ));
    }
    let len = vectors[0].len();
    if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != len) {
        return Err(Error::dim(
            None,
            format!("feature vector {i} has length {} but vector 0 has {len}", v.len()),
        ));
    }
    vectors
        .iter()
        .zip(labels)
        .zip(ids)
        .map(|((v, &label), id)| {
            Ok(Example {
                input: config.input(v)?,
                label,
                item: id.clone(),
                position: (0, 0, 0),
            })
        })
        .collect()
}

/// Trains the 1D classifier on one feature vector per video.
///
/// `ids` name the videos so that a by-item split can hold whole videos out.
pub fn train_aggregator(
    vectors: &[FeatureVector],
    labels: &[usize],
    ids: &[String],
    config: &AggregatorConfig,
    train_config: &TrainConfig,
    exec: &Exec,
) -> Result<(Model, Vec<EpochStats>)> {
    let examples = aggregator_examples(vectors, labels, ids, config)?;
    let input_len = examples[0].input.shape()[1];
    let mut model = build_1d(&config.filters, &config.fc_sizes, config.num_classes, input_len, train_config.seed)?;
    let curves = train(&mut model, &examples, train_config, exec)?;
    Ok((model, curves))
}
