//! Minibatch training with seeded per-epoch shuffling.
//!
//! Randomness comes from ChaCha8 seeded with the run seed: stream 0 draws
//! the patch-random validation split and stream `epoch` (1-based) the
//! shuffle of that epoch. Examples are first put into a canonical order
//! (item id, grid position, label), so results do not depend on how the
//! caller stored them.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Exec, Model};
use crate::error::{Error, Result};
use crate::optim::{Optimizer, OptimizerConfig};
use crate::tensor::{argmax, Tensor};

pub const DEFAULT_BATCH_SIZE: usize = 32;
const EVAL_BATCH: usize = 64;

/// One training example: a model input with its label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Tensor,
    pub label: usize,
    pub item: String,
    pub position: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Split {
    /// Random fraction of all examples held out for validation.
    PatchRandom { fraction: f64 },
    /// Every example of the listed items held out.
    ByItem { held_out: Vec<String> },
}

fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    pub split: Split,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        self.optimizer.validate(false)?;
        if let Split::PatchRandom { fraction } = self.split {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::Config(format!(
                    "validation fraction must lie in (0, 1), got {fraction}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_acc: f64,
    pub val_acc: f64,
    pub train_loss: f64,
    pub val_loss: f64,
}

fn canonical_order(examples: &[Example]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..examples.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&examples[a], &examples[b]);
        (&x.item, x.position, x.label).cmp(&(&y.item, y.position, y.label))
    });
    idx
}

/// Epoch shuffles use stream `epoch` (from 1); model init uses the default
/// stream 0, so the split draws from the far end of the stream space.
const SPLIT_STREAM: u64 = u64::MAX;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits examples into (train, validation) index lists.
pub fn split_examples(examples: &[Example], split: &Split, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let order = canonical_order(examples);
    let (train, val): (Vec<usize>, Vec<usize>) = match split {
        Split::PatchRandom { fraction } => {
            let n = order.len();
            let mut rank = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                rank[i] = pos;
            }
            let mut shuffled = order;
            shuffled.shuffle(&mut rng_for(seed, SPLIT_STREAM));
            if n < 2 {
                return Err(Error::Config(format!("cannot split {n} example(s) into train and validation")));
            }
            let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
            let mut val = shuffled[..n_val].to_vec();
            let mut train = shuffled[n_val..].to_vec();
            train.sort_by_key(|&i| rank[i]);
            val.sort_by_key(|&i| rank[i]);
            (train, val)
        }
        Split::ByItem { held_out } => {
            let present: HashSet<&str> = examples.iter().map(|e| e.item.as_str()).collect();
            if let Some(missing) = held_out.iter().find(|id| !present.contains(id.as_str())) {
                return Err(Error::Config(format!("held-out item '{missing}' has no examples")));
            }
            let held: HashSet<&str> = held_out.iter().map(String::as_str).collect();
            order.into_iter().partition(|&i| !held.contains(examples[i].item.as_str()))
        }
    };
    if train.is_empty() || val.is_empty() {
        return Err(Error::Config(format!(
            "split leaves {} training and {} validation examples; both must be non-empty",
            train.len(),
            val.len()
        )));
    }
    Ok((train, val))
}

/// Accuracy and mean loss of `model` over the selected examples, plus the
/// predicted class of each.
pub fn score(model: &Model, examples: &[&Example], exec: &Exec) -> Result<(f64, f64, Vec<usize>)> {
    if examples.is_empty() {
        return Err(Error::Config("cannot score an empty set".into()));
    }
    let mut correct = 0;
    let mut loss = 0.0;
    let mut preds = Vec::with_capacity(examples.len());
    for chunk in examples.chunks(EVAL_BATCH) {
        let inputs: Vec<&Tensor> = chunk.iter().map(|e| &e.input).collect();
        let probs = model.predict_proba(&inputs, exec)?;
        for (p, e) in probs.iter().zip(chunk) {
            let pred = argmax(p);
            if pred == e.label {
                correct += 1;
            }
            loss += crate::nn::cross_entropy(p, e.label)?.0;
            preds.push(pred);
        }
    }
    let n = examples.len() as f64;
    Ok((correct as f64 / n, loss / n, preds))
}

/// Trains on `train` and reports per-epoch curves on both sets.
pub fn fit(
    model: &mut Model,
    train: &[&Example],
    val: &[&Example],
    config: &TrainConfig,
    exec: &Exec,
) -> Result<Vec<EpochStats>> {
    config.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::Config("training and validation sets must be non-empty".into()));
    }
    let classes = model.num_classes();
    if let Some(e) = train.iter().chain(val).find(|e| e.label >= classes) {
        return Err(Error::Label(format!(
            "example {}:{:?} has label {} but the model has {classes} classes",
            e.item, e.position, e.label
        )));
    }
    let mut optimizer = Optimizer::new(config.optimizer, &model.param_buffer_sizes());
    let mut curves = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng_for(config.seed, epoch as u64));
        for batch in order.chunks(config.batch_size) {
            let inputs: Vec<&Tensor> = batch.iter().map(|&i| &train[i].input).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| train[i].label).collect();
            let g = model.loss_and_grads(&inputs, &labels, exec)?;
            if !g.mean_loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    message: format!("batch loss {}", g.mean_loss),
                });
            }
            let grads: Vec<&[f64]> = g.grads.iter().map(Vec::as_slice).collect();
            let mut params = model.param_buffers_mut();
            optimizer.step(&mut params, &grads).map_err(|e| match e {
                Error::Numeric(message) => Error::Divergence { epoch, message },
                other => other,
            })?;
        }
        let (train_acc, train_loss, _) = score(model, train, exec)?;
        let (val_acc, val_loss, _) = score(model, val, exec)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                message: format!("train loss {train_loss}, validation loss {val_loss}"),
            });
        }
        curves.push(EpochStats {
            epoch,
            train_acc,
            val_acc,
            train_loss,
            val_loss,
        });
    }
    Ok(curves)
}

/// Splits `examples` per `config.split` and trains `model` in place.
pub fn train(model: &mut Model, examples: &[Example], config: &TrainConfig, exec: &Exec) -> Result<Vec<EpochStats>> {
    config.validate()?;
    let (tr, va) = split_examples(examples, &config.split, config.seed)?;
    let train_set: Vec<&Example> = tr.iter().map(|&i| &examples[i]).collect();
    let val_set: Vec<&Example> = va.iter().map(|&i| &examples[i]).collect();
    fit(model, &train_set, &val_set, config, exec)
}

pub fn curves_to_csv(curves: &[EpochStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epoch", "train_acc", "val_acc", "train_loss", "val_loss"])
        .expect("in-memory write");
    for c in curves {
        w.write_record([
            c.epoch.to_string(),
            c.train_acc.to_string(),
            c.val_acc.to_string(),
            c.train_loss.to_string(),
            c.val_loss.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn curves_from_csv(text: &str) -> Result<Vec<EpochStats>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::Config(format!("curves CSV: {e}")))?;
        let num = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("curves CSV: bad field {i} in {row:?}")))
        };
        out.push(EpochStats {
            epoch: num(0)? as usize,
            train_acc: num(1)?,
            val_acc: num(2)?,
            train_loss: num(3)?,
            val_loss: num(4)?,
        });
    }
    Ok(out)
}
