//! Patch classifier, training loop, aggregation and metrics.

mod exec;
mod model;
mod train;

pub mod aggregate;
pub mod metrics;

pub use aggregate::{
    aggregator_examples, extract_feature_vector, majority_vote, train_aggregator, AggregatorConfig, FeatureVector,
};
pub use exec::Exec;
pub use metrics::{evaluate, ClassRates, ClassificationReport};
pub use model::{build_model, BatchGrads, Layer, Model, ModelConfig, DEFAULT_FC_SIZES, KERNEL_EDGE};
pub use train::{
    curves_from_csv, curves_to_csv, fit, score, split_examples, train, EpochStats, Example, Split,
    TrainConfig, DEFAULT_BATCH_SIZE,
};

pub(crate) use model::build_1d;

use crate::dataset::Patch;
use crate::error::Result;
use crate::tensor::Tensor;

/// 8-bit luminance `v` enters the network as `(v - INPUT_OFFSET) * INPUT_SCALE`,
/// which maps `[0, 255]` onto `[-1, 1]`.
pub const INPUT_OFFSET: f64 = 127.5;
pub const INPUT_SCALE: f64 = 1.0 / 127.5;

/// Maps a `[k, k, k]` luminance cube to a `[1, k, k, k]` network input.
pub fn cube_to_input(cube: &Tensor) -> Result<Tensor> {
    let mut shape = vec![1];
    shape.extend_from_slice(cube.shape());
    Tensor::new(
        shape,
        cube.data().iter().map(|v| (v - INPUT_OFFSET) * INPUT_SCALE).collect(),
    )
}

pub fn patch_to_example(patch: &Patch) -> Result<Example> {
    Ok(Example {
        input: cube_to_input(&patch.cube)?,
        label: patch.label,
        item: patch.source_item.clone(),
        position: patch.grid_position,
    })
}

pub fn patches_to_examples(patches: &[Patch]) -> Result<Vec<Example>> {
    patches.iter().map(patch_to_example).collect()
}
