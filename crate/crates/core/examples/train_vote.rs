//! Trains a small patch classifier on a synthetic dataset and labels the
//! held-out sequences by majority vote.
//!
//! ```text
//! cargo run --release --example train_vote
//! ```

use std::collections::BTreeMap;

use vqoe::dataset::{extract_patches, synthesize_dataset, PatchSpec, SynthConfig};
use vqoe::optim::OptimizerConfig;
use vqoe::pipeline::{
    build_model, evaluate, majority_vote, patches_to_examples, score, split_examples, train, Example, Exec,
    ModelConfig, Split, TrainConfig,
};

fn main() -> vqoe::Result<()> {
    let synth = SynthConfig {
        width: 32,
        height: 32,
        frames: 16,
        ..SynthConfig::default()
    };
    let spec = PatchSpec::new(8)?;
    let mut examples = Vec::new();
    for s in synthesize_dataset(&synth)? {
        examples.extend(patches_to_examples(&extract_patches(&s.volume, &spec, s.label, &s.item.id)?)?);
    }
    let held_out: Vec<String> = (0..synth.classes).map(|c| format!("synth_c{c}_002")).collect();
    let config = TrainConfig {
        epochs: 30,
        optimizer: OptimizerConfig::adagrad(0.01),
        batch_size: 32,
        seed: 0,
        split: Split::ByItem { held_out },
    };
    let exec = Exec::single();
    let mut model = build_model(&ModelConfig::new(2, 8, synth.classes).with_fc_sizes(vec![64]), spec.k, 0)?;
    let curves = train(&mut model, &examples, &config, &exec)?;
    for c in curves.iter().step_by(5) {
        println!("epoch {:>2}: train acc {:.3}, val acc {:.3}, val loss {:.4}", c.epoch, c.train_acc, c.val_acc, c.val_loss);
    }

    let (_, val) = split_examples(&examples, &config.split, config.seed)?;
    let val: Vec<&Example> = val.iter().map(|&i| &examples[i]).collect();
    let (acc, _, preds) = score(&model, &val, &exec)?;
    println!("held-out patch accuracy {acc:.3}");

    let mut per_item: BTreeMap<&str, (usize, Vec<usize>)> = BTreeMap::new();
    for (e, &p) in val.iter().zip(&preds) {
        per_item.entry(&e.item).or_insert((e.label, Vec::new())).1.push(p);
    }
    let (mut votes, mut truths) = (Vec::new(), Vec::new());
    for (item, (truth, labels)) in &per_item {
        let vote = majority_vote(labels)?;
        println!("{item}: truth {truth}, vote {vote} from {} patches", labels.len());
        votes.push(vote);
        truths.push(*truth);
    }
    println!("sequence accuracy {:.3}", evaluate(&votes, &truths, synth.classes)?.accuracy);
    Ok(())
}
