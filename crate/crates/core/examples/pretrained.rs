//! Weight-snapshot aggregation: a feature vector per synthetic video, then a
//! 1D network that classifies the vectors.
//!
//! Every video starts from the same initial weights, so the vectors differ
//! only through the per-patch gradient steps. The example prints the mean
//! distance between vectors of the same class and of different classes
//! next to the aggregator's accuracy.
//!
//! ```text
//! cargo run --release --example pretrained
//! ```

use vqoe::dataset::{synthesize_dataset, PatchSpec, SynthConfig};
use vqoe::optim::OptimizerConfig;
use vqoe::pipeline::{
    extract_feature_vector, train_aggregator, AggregatorConfig, Exec, ModelConfig, Split, TrainConfig,
};

fn main() -> vqoe::Result<()> {
    let synth = SynthConfig {
        items_per_class: 4,
        width: 32,
        height: 32,
        frames: 16,
        ..SynthConfig::default()
    };
    let items = synthesize_dataset(&synth)?;
    let model = ModelConfig::new(2, 2, synth.classes).with_fc_sizes(vec![8]);
    let spec = PatchSpec::new(8)?;
    let patches = 16;
    let exec = Exec::single();

    let vectors = items
        .iter()
        .map(|s| extract_feature_vector(&s.volume, &model, &spec, patches, &OptimizerConfig::sgd(0.01), 0, 7))
        .collect::<vqoe::Result<Vec<_>>>()?;
    println!(
        "{} vectors of {} patches x {} coefficients = {} values",
        vectors.len(),
        patches,
        vectors[0].coefficients,
        vectors[0].len()
    );

    let labels: Vec<usize> = items.iter().map(|s| s.label).collect();
    let (mut within, mut between) = ((0.0, 0), (0.0, 0));
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let d = vectors[i]
                .values
                .iter()
                .zip(&vectors[j].values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let slot = if labels[i] == labels[j] { &mut within } else { &mut between };
            slot.0 += d;
            slot.1 += 1;
        }
    }
    println!(
        "mean distance within a class {:.4}, between classes {:.4}",
        within.0 / within.1 as f64,
        between.0 / between.1 as f64
    );

    let ids: Vec<String> = items.iter().map(|s| s.item.id.clone()).collect();
    let agg = AggregatorConfig {
        filters: vec![8, 16],
        fc_sizes: vec![32],
        num_classes: synth.classes,
        input_cap: Some(512),
    };
    let held_out: Vec<String> = (0..synth.classes).map(|c| format!("synth_c{c}_003")).collect();
    let config = TrainConfig {
        epochs: 40,
        optimizer: OptimizerConfig::adagrad(0.01),
        batch_size: 4,
        seed: 0,
        split: Split::ByItem { held_out },
    };
    let (net, curves) = train_aggregator(&vectors, &labels, &ids, &agg, &config, &exec)?;
    let last = curves.last().expect("trained at least one epoch");
    println!("aggregator with {} parameters", net.param_count());
    println!("final train accuracy {:.3}, held-out accuracy {:.3}", last.train_acc, last.val_acc);
    Ok(())
}
