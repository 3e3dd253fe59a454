mod common;

use common::rng;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vqoe::dataset::{extract_patches, PatchSpec, VideoVolume};
use vqoe::optim::OptimizerConfig;
use vqoe::pipeline::{
    build_model, evaluate, extract_feature_vector, fit, majority_vote, patches_to_examples, train,
    train_aggregator, AggregatorConfig, ClassificationReport, Example, Exec, FeatureVector, ModelConfig,
    Split, TrainConfig,
};
use vqoe::{Error, Tensor};

fn tiny_model() -> ModelConfig {
    ModelConfig::new(2, 2, 3).with_fc_sizes(vec![8])
}

fn volume(seed: u64, w: usize, h: usize, f: usize) -> VideoVolume {
    let mut r = rng(seed);
    VideoVolume::new(Tensor::from_fn([h, w, f], |_| r.gen_range(0..=255) as f64), 25.0).unwrap()
}

/// Three items of 8x8x8, k = 4, eight patches each, labelled by item.
fn tiny_examples() -> Vec<Example> {
    let spec = PatchSpec::new(4).unwrap();
    let mut out = Vec::new();
    for item in 0..3 {
        let patches = extract_patches(&volume(item, 8, 8, 8), &spec, item as usize, &format!("v{item}")).unwrap();
        out.extend(patches_to_examples(&patches).unwrap());
    }
    out
}

fn config(epochs: usize, split: Split) -> TrainConfig {
    TrainConfig {
        epochs,
        optimizer: OptimizerConfig::adagrad(0.01),
        batch_size: 5,
        seed: 17,
        split,
    }
}

#[test]
fn single_patch_is_memorized() {
    let examples = tiny_examples();
    let one = &examples[3];
    let mut model = build_model(&ModelConfig::new(2, 2, 2).with_fc_sizes(vec![8]), 4, 1).unwrap();
    let mut one = one.clone();
    one.label = 1;
    let cfg = TrainConfig { optimizer: OptimizerConfig::adagrad(0.05), ..config(40, Split::PatchRandom { fraction: 0.5 }) };
    let curves = fit(&mut model, &[&one], &[&one], &cfg, &Exec::single()).unwrap();
    assert_eq!(curves.last().unwrap().train_acc, 1.0);
}

#[test]
fn training_is_deterministic_and_order_invariant() {
    let examples = tiny_examples();
    let cfg = config(3, Split::PatchRandom { fraction: 0.25 });
    let run = |ex: &[Example], exec: &Exec| {
        let mut m = build_model(&tiny_model(), 4, 5).unwrap();
        let curves = train(&mut m, ex, &cfg, exec).unwrap();
        (curves, m.flat_params())
    };
    let base = run(&examples, &Exec::single());
    assert_eq!(base.0.len(), 3);
    assert_eq!(run(&examples, &Exec::single()), base);
    let mut shuffled = examples.clone();
    shuffled.shuffle(&mut rng(99));
    assert_eq!(run(&shuffled, &Exec::single()), base);
    assert_eq!(run(&examples, &Exec::new(3).unwrap()), base);
}

#[test]
fn by_item_split_holds_out_whole_items() {
    let examples = tiny_examples();
    let (tr, va) = vqoe::pipeline::split_examples(&examples, &Split::ByItem { held_out: vec!["v1".into()] }, 0).unwrap();
    assert_eq!((tr.len(), va.len()), (16, 8));
    assert!(va.iter().all(|&i| examples[i].item == "v1"));
    let missing = Split::ByItem { held_out: vec!["nope".into()] };
    assert!(matches!(vqoe::pipeline::split_examples(&examples, &missing, 0), Err(Error::Config(_))));
    let everything = Split::ByItem { held_out: vec!["v0".into(), "v1".into(), "v2".into()] };
    assert!(matches!(vqoe::pipeline::split_examples(&examples, &everything, 0), Err(Error::Config(_))));
}

#[test]
fn non_finite_loss_is_divergence_naming_the_epoch() {
    let mut examples = tiny_examples();
    examples[0].input.data_mut()[0] = f64::NAN;
    let mut m = build_model(&tiny_model(), 4, 5).unwrap();
    let e = train(&mut m, &examples, &config(2, Split::PatchRandom { fraction: 0.25 }), &Exec::single()).unwrap_err();
    assert!(matches!(e, Error::Divergence { epoch: 1, .. }), "{e}");
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn labels_outside_the_model_are_rejected() {
    let mut examples = tiny_examples();
    examples[2].label = 7;
    let mut m = build_model(&tiny_model(), 4, 5).unwrap();
    let e = train(&mut m, &examples, &config(1, Split::PatchRandom { fraction: 0.25 }), &Exec::single()).unwrap_err();
    assert!(matches!(e, Error::Label(_)));
}

/// Count-and-argmax over every sequence of length 1..=6 on three classes.
#[test]
fn majority_vote_matches_exhaustive_mode() {
    for len in 1..=6u32 {
        for code in 0..3usize.pow(len) {
            let labels: Vec<usize> = (0..len).map(|i| code / 3usize.pow(i) % 3).collect();
            let mut counts = [0usize; 3];
            for &l in &labels {
                counts[l] += 1;
            }
            let mut best = 0;
            for c in 1..3 {
                if counts[c] > counts[best] {
                    best = c;
                }
            }
            assert_eq!(majority_vote(&labels).unwrap(), best, "{labels:?}");
        }
    }
}

#[test]
fn feature_vectors_have_length_p_times_t() {
    let mut r = rng(4);
    for case in 0..10 {
        let layers = r.gen_range(2..=3);
        let k = if layers == 3 { 8 } else { [4, 8][r.gen_range(0..2)] };
        let cfg = ModelConfig::new(layers, r.gen_range(1..=3), r.gen_range(1..=4))
            .with_fc_sizes(vec![r.gen_range(1..=6)]);
        let p = r.gen_range(1..=5);
        let vol = volume(case, 2 * k, k, 2 * k);
        let fv = extract_feature_vector(&vol, &cfg, &PatchSpec::new(k).unwrap(), p, &OptimizerConfig::sgd(0.01), 0, case).unwrap();
        let t = build_model(&cfg, k, case).unwrap().param_count();
        assert_eq!(fv.len(), p * t, "case {case}");
        assert_eq!((fv.patches, fv.coefficients), (p, t));
    }
}

#[test]
fn zero_rate_snapshots_equal_the_initial_weights() {
    let cfg = tiny_model();
    let vol = volume(1, 8, 8, 8);
    for opt in [OptimizerConfig::sgd(0.0), OptimizerConfig::adagrad(0.0)] {
        let fv = extract_feature_vector(&vol, &cfg, &PatchSpec::new(4).unwrap(), 3, &opt, 2, 11).unwrap();
        let init = build_model(&cfg, 4, 11).unwrap().flat_params();
        for p in 0..3 {
            assert_eq!(fv.snapshot(p), init.as_slice());
        }
    }
    let moved = extract_feature_vector(&vol, &cfg, &PatchSpec::new(4).unwrap(), 1, &OptimizerConfig::sgd(0.1), 0, 11).unwrap();
    assert_ne!(moved.snapshot(0), build_model(&cfg, 4, 11).unwrap().flat_params().as_slice());
}

#[test]
fn feature_extraction_errors() {
    let small = volume(0, 3, 8, 8);
    let e = extract_feature_vector(&small, &tiny_model(), &PatchSpec::new(4).unwrap(), 2, &OptimizerConfig::sgd(0.01), 0, 0).unwrap_err();
    assert!(matches!(e, Error::Dimension { axis: Some(1), .. }), "{e}");
    let ok = volume(0, 8, 8, 8);
    let e = extract_feature_vector(&ok, &tiny_model(), &PatchSpec::new(4).unwrap(), 2, &OptimizerConfig::sgd(0.01), 3, 0).unwrap_err();
    assert!(matches!(e, Error::Label(_)));
}

fn small_aggregator(classes: usize) -> AggregatorConfig {
    AggregatorConfig { filters: vec![4, 8, 16], fc_sizes: vec![16], num_classes: classes, input_cap: Some(64) }
}

fn fv(values: Vec<f64>) -> FeatureVector {
    FeatureVector { patches: 1, coefficients: values.len(), values }
}

#[test]
fn aggregator_separates_offset_classes() {
    let mut r = rng(8);
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for i in 0..8 {
        let label = i % 2;
        let offset = if label == 1 { 5.0 } else { -5.0 };
        vectors.push(fv((0..200).map(|_| offset + r.gen_range(-0.5..0.5)).collect()));
        labels.push(label);
        ids.push(format!("video{i}"));
    }
    let tcfg = TrainConfig {
        epochs: 50,
        optimizer: OptimizerConfig::adagrad(0.01),
        batch_size: 4,
        seed: 2,
        split: Split::ByItem { held_out: vec!["video6".into(), "video7".into()] },
    };
    let (model, curves) = train_aggregator(&vectors, &labels, &ids, &small_aggregator(2), &tcfg, &Exec::single()).unwrap();
    assert_eq!(curves.last().unwrap().train_acc, 1.0);
    assert_eq!(model.input_shape(), [1, 64, 1, 1]);
    let again = train_aggregator(&vectors, &labels, &ids, &small_aggregator(2), &tcfg, &Exec::single()).unwrap();
    assert_eq!(again.1, curves);
}

#[test]
fn aggregator_on_identical_vectors_fits_trivially() {
    let v = fv((0..50).map(|i| (i as f64).sin()).collect());
    let ids = vec!["a".to_string(), "b".to_string()];
    let tcfg = TrainConfig {
        epochs: 5,
        optimizer: OptimizerConfig::adagrad(0.01),
        batch_size: 2,
        seed: 0,
        split: Split::ByItem { held_out: vec!["b".into()] },
    };
    let (_, curves) = train_aggregator(&[v.clone(), v], &[1, 1], &ids, &small_aggregator(2), &tcfg, &Exec::single()).unwrap();
    assert_eq!(curves.last().unwrap().train_acc, 1.0);
}

#[test]
fn aggregator_rejects_ragged_vectors() {
    let ids = vec!["a".to_string(), "b".to_string()];
    let tcfg = config(1, Split::ByItem { held_out: vec!["b".into()] });
    let e = train_aggregator(&[fv(vec![0.0; 10]), fv(vec![0.0; 11])], &[0, 1], &ids, &small_aggregator(2), &tcfg, &Exec::single())
        .unwrap_err();
    assert!(matches!(e, Error::Dimension { .. }));
}

#[test]
fn evaluate_accuracy_equals_naive_count() {
    let examples = tiny_examples();
    let m = build_model(&tiny_model(), 4, 3).unwrap();
    let refs: Vec<&Example> = examples.iter().collect();
    let (_, _, preds) = vqoe::pipeline::score(&m, &refs, &Exec::single()).unwrap();
    let truths: Vec<usize> = examples.iter().map(|e| e.label).collect();
    let report = evaluate(&preds, &truths, 3).unwrap();
    let mut correct = 0;
    for i in 0..preds.len() {
        if preds[i] == truths[i] {
            correct += 1;
        }
    }
    assert_eq!(report.accuracy, correct as f64 / preds.len() as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn confusion_identities(k in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m: Vec<Vec<u64>> = (0..k).map(|_| (0..k).map(|_| r.gen_range(0..20)).collect()).collect();
        prop_assume!(m.iter().flatten().sum::<u64>() > 0);
        let rep = ClassificationReport::from_confusion(m.clone()).unwrap();
        let total: u64 = m.iter().flatten().sum();
        let trace: u64 = (0..k).map(|i| m[i][i]).sum();
        prop_assert_eq!(rep.accuracy, trace as f64 / total as f64);
        for (c, rates) in rep.per_class.iter().enumerate() {
            prop_assert_eq!(rates.tp + rates.fn_, m[c].iter().sum::<u64>());
            if let (Some(a), Some(b)) = (rates.tpr, rates.fnr) {
                prop_assert_eq!(a + b, 1.0);
            }
            if let (Some(a), Some(b)) = (rates.fpr, rates.tnr) {
                prop_assert_eq!(a + b, 1.0);
            }
        }
    }
}
