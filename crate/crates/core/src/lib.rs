//! No-reference video quality-of-experience prediction.
//!
//! The crate models TCP start-up delay for compressed clips, cuts luminance
//! volumes into `k x k x k` patches, trains a 3D CNN written from scratch on
//! discretized MOS labels, and aggregates patch predictions into one quality
//! class per sequence, either by majority vote or through a second, 1D CNN
//! fed with per-patch weight snapshots.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod netmodel;
pub mod nn;
pub mod optim;
pub mod pipeline;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
