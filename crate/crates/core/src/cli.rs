//! Config-driven commands behind the `vqoe` binary.
//!
//! Each `cmd_*` function takes a resolved [`RunConfig`], writes its
//! artifacts under `<output_dir>/seed-<seed>/`, drops a copy of the
//! resolved config there as `<command>.config.json`, and returns the
//! directory plus a few human-readable summary lines.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::{
    extract_patches, load_manifest_with, read_yuv_luma, synthesize_dataset, write_manifest,
    write_y_only, DatasetItem, DiscretizationSpec, PatchSpec, SynthConfig, VideoVolume,
    DEFAULT_PATCH_EDGE, DEFAULT_QP_SET,
};
use crate::error::{Error, Result};
use crate::netmodel::{
    builtin_presets, delay, embed_delay, find_preset, load_presets, stall_frames, ClipTransmission,
    ConditionPreset, StallMode,
};
use crate::nn::serialize::write_weights;
use crate::optim::OptimizerConfig;
use crate::pipeline::{
    aggregator_examples, build_model, curves_from_csv, curves_to_csv, evaluate, extract_feature_vector,
    majority_vote, patches_to_examples, score, split_examples, train, train_aggregator,
    AggregatorConfig, EpochStats, Example, Exec, FeatureVector, ModelConfig, Split, TrainConfig,
    DEFAULT_BATCH_SIZE, DEFAULT_FC_SIZES,
};
use crate::tensor::Tensor;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_qp_set() -> Vec<i64> {
    DEFAULT_QP_SET.to_vec()
}

fn default_patch_k() -> usize {
    DEFAULT_PATCH_EDGE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetsimSection {
    /// Preset table file; the built-in table when absent.
    pub presets: Option<PathBuf>,
    /// Applied to every item instead of the item's own preset.
    pub preset: Option<String>,
    pub stall_mode: StallMode,
}

impl Default for NetsimSection {
    fn default() -> Self {
        NetsimSection {
            presets: None,
            preset: None,
            stall_mode: StallMode::Freeze,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestSection {
    /// Also write stall-embedded Y-only copies plus their manifest.
    pub embed_stall: bool,
}

impl Default for IngestSection {
    fn default() -> Self {
        IngestSection { embed_stall: false }
    }
}

/// Network architecture; the class count follows from the discretization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub num_conv_layers: usize,
    pub first_layer_filters: usize,
    pub fc_sizes: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            num_conv_layers: 2,
            first_layer_filters: 16,
            fc_sizes: DEFAULT_FC_SIZES.to_vec(),
        }
    }
}

/// Training schedule. An empty `by_item` held-out list selects the last
/// item (by id) of every class that has at least two items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub split: Split,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            epochs: 50,
            optimizer: OptimizerConfig::adagrad(0.01),
            batch_size: DEFAULT_BATCH_SIZE,
            split: Split::ByItem { held_out: Vec::new() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Weights to evaluate; `model.weights` in the run directory when absent.
    pub weights: Option<PathBuf>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { weights: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregatorSection {
    pub filters: Vec<usize>,
    pub fc_sizes: Vec<usize>,
    pub input_cap: Option<usize>,
}

impl Default for AggregatorSection {
    fn default() -> Self {
        let a = AggregatorConfig::new(1);
        AggregatorSection {
            filters: a.filters,
            fc_sizes: a.fc_sizes,
            input_cap: a.input_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainSection {
    /// Patches per video.
    pub patches: usize,
    /// Per-patch optimizer of the 3D network.
    pub optimizer: OptimizerConfig,
    pub target_class: usize,
    pub aggregator: AggregatorSection,
    pub train: TrainSection,
}

impl Default for PretrainSection {
    fn default() -> Self {
        PretrainSection {
            patches: 1000,
            optimizer: OptimizerConfig::sgd(0.01),
            target_class: 0,
            aggregator: AggregatorSection::default(),
            train: TrainSection::default(),
        }
    }
}

/// Everything a command needs. Every field has a default, so `{}` is a
/// valid config for `synth`, `netsim` with a manifest, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default = "default_qp_set")]
    pub qp_set: Vec<i64>,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    #[serde(default = "default_patch_k")]
    pub patch_k: usize,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub netsim: NetsimSection,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub pretrain: PretrainSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

/// Sets a dotted key inside a JSON document. The value is parsed as JSON
/// when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("override key '{key}' has an empty segment")));
        }
        let map = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just set")
            }
            _ => {
                return Err(Error::Config(format!(
                    "override '{key}': '{}' is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one segment")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, &[])
    }

    /// Parses `text` (empty means `{}`) after applying `key=value` overrides.
    pub fn from_json_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value = if text.trim().is_empty() {
            Value::Object(Default::default())
        } else {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(doc).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.synth.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_with(&text, overrides)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(format!("seed-{}", self.seed))
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig::new(
            self.model.num_conv_layers,
            self.model.first_layer_filters,
            self.discretization.num_bins(),
        )
        .with_fc_sizes(self.model.fc_sizes.clone())
    }

    pub fn patch_spec(&self) -> Result<PatchSpec> {
        PatchSpec::new(self.patch_k)
    }

    fn train_config(&self, section: &TrainSection, split: Split) -> TrainConfig {
        TrainConfig {
            epochs: section.epochs,
            optimizer: section.optimizer,
            batch_size: section.batch_size,
            seed: self.seed,
            split,
        }
    }

    fn manifest_path(&self) -> Result<&Path> {
        let path = self
            .manifest
            .as_deref()
            .ok_or_else(|| Error::Config("this command needs a manifest path".into()))?;
        if !path.is_file() {
            return Err(Error::Config(format!("manifest {} does not exist", path.display())));
        }
        Ok(path)
    }
}

/// Where a command wrote its artifacts and what it has to say.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub dir: PathBuf,
    pub messages: Vec<String>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare(cfg: &RunConfig, command: &str) -> Result<PathBuf> {
    cfg.discretization.validate()?;
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_text(&dir.join(format!("{command}.config.json")), &cfg.to_json())?;
    Ok(dir)
}

struct Dataset {
    items: Vec<DatasetItem>,
    labels: Vec<usize>,
    root: PathBuf,
}

impl Dataset {
    fn load(cfg: &RunConfig) -> Result<Self> {
        let path = cfg.manifest_path()?;
        let items = load_manifest_with(path, &cfg.qp_set)?;
        if items.is_empty() {
            return Err(Error::Schema {
                record: path.display().to_string(),
                message: "manifest lists no items".into(),
            });
        }
        let labels = items
            .iter()
            .map(|i| i.label(&cfg.discretization))
            .collect::<Result<_>>()?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Dataset { items, labels, root })
    }

    fn volume(&self, i: usize) -> Result<VideoVolume> {
        let item = &self.items[i];
        read_yuv_luma(
            &item.resolve_path(&self.root),
            item.width,
            item.height,
            item.frames,
            item.fps,
            item.format()?,
        )
    }

    fn examples(&self, spec: &PatchSpec, exec: &Exec) -> Result<Vec<Example>> {
        let idx: Vec<usize> = (0..self.items.len()).collect();
        let per_item = exec.map(&idx, |_, &i| -> Result<Vec<Example>> {
            let patches = extract_patches(&self.volume(i)?, spec, self.labels[i], &self.items[i].id)?;
            patches_to_examples(&patches)
        });
        let mut out = Vec::new();
        for r in per_item {
            out.extend(r?);
        }
        Ok(out)
    }

    /// Fills an empty by-item held-out list with the last item (by id) of
    /// every class that has at least two items.
    fn resolve_split(&self, split: &Split) -> Result<Split> {
        match split {
            Split::ByItem { held_out } if held_out.is_empty() => {
                let mut per_class: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
                for (item, &label) in self.items.iter().zip(&self.labels) {
                    per_class.entry(label).or_default().push(&item.id);
                }
                let held_out: Vec<String> = per_class
                    .into_values()
                    .filter(|ids| ids.len() >= 2)
                    .map(|ids| ids.into_iter().max().expect("non-empty").to_string())
                    .collect();
                if held_out.is_empty() {
                    return Err(Error::Config(
                        "no class has two items, so no item can be held out automatically".into(),
                    ));
                }
                Ok(Split::ByItem { held_out })
            }
            other => Ok(other.clone()),
        }
    }
}

fn presets(cfg: &RunConfig) -> Result<Vec<ConditionPreset>> {
    match &cfg.netsim.presets {
        Some(p) => load_presets(p),
        None => Ok(builtin_presets()),
    }
}

/// Writes a synthetic dataset: Y-only videos under `videos/` plus `manifest.json`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome> {
    cfg.synth.validate()?;
    let dir = prepare(cfg, "synth")?;
    let items = synthesize_dataset(&cfg.synth)?;
    let videos = dir.join("videos");
    fs::create_dir_all(&videos).map_err(|e| Error::io(&videos, e))?;
    for s in &items {
        write_y_only(&dir.join(&s.item.path), &s.volume)?;
    }
    let manifest: Vec<DatasetItem> = items.iter().map(|s| s.item.clone()).collect();
    write_manifest(&manifest, &dir.join("manifest.json"))?;
    let mut messages = vec![format!(
        "{} items in {} classes written to {}",
        items.len(),
        cfg.synth.classes,
        dir.display()
    )];
    for (c, level) in cfg.synth.levels.iter().take(cfg.synth.classes).enumerate() {
        messages.push(format!("class {c}: quantization step {}, qp {}", level.step, level.qp));
    }
    Ok(Outcome { dir, messages })
}

/// Reads every manifest item, checks it against its declared geometry and
/// writes `ingest.csv`. With `ingest.embed_stall`, stall-embedded copies go
/// to `stalled/` together with a manifest describing them.
pub fn cmd_ingest(cfg: &RunConfig, exec: &Exec) -> Result<Outcome> {
    let data = Dataset::load(cfg)?;
    let spec = cfg.patch_spec()?;
    let table = presets(cfg)?;
    let dir = prepare(cfg, "ingest")?;
    let stalled_dir = dir.join("stalled");
    if cfg.ingest.embed_stall {
        fs::create_dir_all(&stalled_dir).map_err(|e| Error::io(&stalled_dir, e))?;
    }
    let idx: Vec<usize> = (0..data.items.len()).collect();
    let rows = exec.map(&idx, |_, &i| -> Result<(Vec<String>, Option<DatasetItem>)> {
        let item = &data.items[i];
        let volume = data.volume(i)?;
        let (nx, ny, nt) = spec.grid(&volume)?;
        let mean = volume.luma().data().iter().sum::<f64>() / volume.luma().len() as f64;
        let preset = find_preset(&table, cfg.netsim.preset.as_deref().unwrap_or(&item.preset))?;
        let clip = ClipTransmission::new(item.bitrate_bps, item.duration_s(), item.fps)?;
        let d = delay(&clip, preset.rate_bps())?;
        let stall = stall_frames(d, item.fps)?;
        let stalled = if cfg.ingest.embed_stall {
            let v = embed_delay(&volume, d, item.fps, cfg.netsim.stall_mode)?;
            let path = PathBuf::from(format!("{}.yraw", item.id));
            write_y_only(&stalled_dir.join(&path), &v)?;
            Some(DatasetItem {
                path,
                frames: v.frames(),
                ..item.clone()
            })
        } else {
            None
        };
        let row = vec![
            item.id.clone(),
            data.labels[i].to_string(),
            item.width.to_string(),
            item.height.to_string(),
            item.frames.to_string(),
            item.fps.to_string(),
            (nx * ny * nt).to_string(),
            mean.to_string(),
            stall.to_string(),
        ];
        Ok((row, stalled))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "item", "label", "width", "height", "frames", "fps", "patches", "mean_luma", "stall_frames",
    ])
    .expect("in-memory write");
    let mut stalled_items = Vec::new();
    let mut patches = 0usize;
    for r in rows {
        let (row, stalled) = r?;
        patches += row[6].parse::<usize>().expect("formatted above");
        w.write_record(&row).expect("in-memory write");
        stalled_items.extend(stalled);
    }
    let csv_text = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    write_text(&dir.join("ingest.csv"), &csv_text)?;
    if cfg.ingest.embed_stall {
        write_manifest(&stalled_items, &stalled_dir.join("manifest.json"))?;
    }
    Ok(Outcome {
        dir,
        messages: vec![format!("{} items ingested, {patches} patches of edge {}", data.items.len(), spec.k)],
    })
}

/// Computes rate, start-up delay and stall frames for each manifest item.
pub fn cmd_netsim(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.manifest_path()?;
    let items = load_manifest_with(path, &cfg.qp_set)?;
    let table = presets(cfg)?;
    let dir = prepare(cfg, "netsim")?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["preset", "rate_bps", "delay_s", "stall_frames", "item", "nominal_bps", "mismatch"])
        .expect("in-memory write");
    let mut flagged = Vec::new();
    for item in &items {
        let preset = find_preset(&table, cfg.netsim.preset.as_deref().unwrap_or(&item.preset))?;
        let rate = preset.rate_bps();
        let clip = ClipTransmission::new(item.bitrate_bps, item.duration_s(), item.fps)?;
        let d = delay(&clip, rate)?;
        w.write_record([
            preset.name.clone(),
            rate.to_string(),
            d.to_string(),
            stall_frames(d, item.fps)?.to_string(),
            item.id.clone(),
            preset.nominal_rate_bps.to_string(),
            u8::from(preset.inconsistent).to_string(),
        ])
        .expect("in-memory write");
        if preset.inconsistent && !flagged.contains(&preset.name) {
            flagged.push(preset.name.clone());
        }
    }
    let text = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    write_text(&dir.join("netsim.csv"), &text)?;
    let mut messages = vec![format!("{} items simulated", items.len())];
    for name in flagged {
        let p = find_preset(&table, &name)?;
        messages.push(format!(
            "preset {name}: model rate {:.4e} bps differs from nominal {:.4e} bps by {:+.1}%",
            p.rate_bps(),
            p.nominal_rate_bps,
            100.0 * p.relative_gap()
        ));
    }
    Ok(Outcome { dir, messages })
}

/// Trains the patch classifier; writes `model.weights`, `model.txt` and `curves.csv`.
pub fn cmd_train(cfg: &RunConfig, exec: &Exec) -> Result<Outcome> {
    let data = Dataset::load(cfg)?;
    let spec = cfg.patch_spec()?;
    let mcfg = cfg.model_config();
    let split = data.resolve_split(&cfg.train.split)?;
    let tcfg = cfg.train_config(&cfg.train, split);
    tcfg.validate()?;
    let mut model = build_model(&mcfg, spec.k, cfg.seed)?;
    let examples = data.examples(&spec, exec)?;
    let dir = prepare(cfg, "train")?;
    let curves = train(&mut model, &examples, &tcfg, exec)?;
    model.save(&dir.join("model.weights"), &dir.join("model.txt"))?;
    write_text(&dir.join("curves.csv"), &curves_to_csv(&curves))?;
    let last = curves.last().expect("at least one epoch");
    Ok(Outcome {
        dir,
        messages: vec![
            format!("{} patches, {} parameters, {} epochs", examples.len(), model.param_count(), curves.len()),
            format!(
                "final train accuracy {:.4}, validation accuracy {:.4}",
                last.train_acc, last.val_acc
            ),
        ],
    })
}

/// Patch-level and majority-vote sequence-level reports on the validation
/// split of the training config.
pub fn cmd_eval(cfg: &RunConfig, exec: &Exec) -> Result<Outcome> {
    let data = Dataset::load(cfg)?;
    let spec = cfg.patch_spec()?;
    let mcfg = cfg.model_config();
    let split = data.resolve_split(&cfg.train.split)?;
    let mut model = build_model(&mcfg, spec.k, cfg.seed)?;
    let weights = cfg
        .eval
        .weights
        .clone()
        .unwrap_or_else(|| cfg.run_dir().join("model.weights"));
    model.load_weights(&weights)?;
    let examples = data.examples(&spec, exec)?;
    let (_, val) = split_examples(&examples, &split, cfg.seed)?;
    let dir = prepare(cfg, "eval")?;
    let val: Vec<&Example> = val.iter().map(|&i| &examples[i]).collect();
    let (_, _, preds) = score(&model, &val, exec)?;
    let truths: Vec<usize> = val.iter().map(|e| e.label).collect();
    let classes = mcfg.num_classes;
    let mut patch_report = evaluate(&preds, &truths, classes)?;
    let curves_path = dir.join("curves.csv");
    if curves_path.is_file() {
        let text = fs::read_to_string(&curves_path).map_err(|e| Error::io(&curves_path, e))?;
        patch_report = patch_report.with_curves(curves_from_csv(&text)?);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item", "bx", "by", "bt", "truth", "pred"]).expect("in-memory write");
    let mut votes: BTreeMap<&str, (usize, Vec<usize>)> = BTreeMap::new();
    for (e, &p) in val.iter().zip(&preds) {
        let (bx, by, bt) = e.position;
        w.write_record([
            e.item.clone(),
            bx.to_string(),
            by.to_string(),
            bt.to_string(),
            e.label.to_string(),
            p.to_string(),
        ])
        .expect("in-memory write");
        votes.entry(&e.item).or_insert((e.label, Vec::new())).1.push(p);
    }
    let patch_csv = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item", "truth", "pred", "patches"]).expect("in-memory write");
    let (mut seq_preds, mut seq_truths) = (Vec::new(), Vec::new());
    for (item, (truth, labels)) in &votes {
        let vote = majority_vote(labels)?;
        w.write_record([item.to_string(), truth.to_string(), vote.to_string(), labels.len().to_string()])
            .expect("in-memory write");
        seq_preds.push(vote);
        seq_truths.push(*truth);
    }
    let seq_csv = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    let seq_report = evaluate(&seq_preds, &seq_truths, classes)?;

    write_text(&dir.join("patch_predictions.csv"), &patch_csv)?;
    write_text(&dir.join("sequence_predictions.csv"), &seq_csv)?;
    write_text(&dir.join("report_patch.csv"), &patch_report.to_csv("patch"))?;
    write_text(&dir.join("report_sequence.csv"), &seq_report.to_csv("sequence"))?;
    Ok(Outcome {
        dir,
        messages: vec![
            format!("patch accuracy {:.4} over {} patches", patch_report.accuracy, val.len()),
            format!(
                "majority-vote sequence accuracy {:.4} over {} sequences",
                seq_report.accuracy,
                seq_preds.len()
            ),
        ],
    })
}

/// Weight-snapshot aggregation: one feature vector per video, then a 1D
/// classifier over them, reported at sequence level on its validation split.
///
/// `features.bin` holds one rank-1 tensor of length `P*T` per manifest item
/// in the weight file format; `features.csv` indexes it.
pub fn cmd_pretrain(cfg: &RunConfig, exec: &Exec) -> Result<Outcome> {
    let data = Dataset::load(cfg)?;
    let spec = cfg.patch_spec()?;
    let mcfg = cfg.model_config();
    mcfg.validate()?;
    let p = &cfg.pretrain;
    let agg = AggregatorConfig {
        filters: p.aggregator.filters.clone(),
        fc_sizes: p.aggregator.fc_sizes.clone(),
        num_classes: mcfg.num_classes,
        input_cap: p.aggregator.input_cap,
    };
    let split = data.resolve_split(&p.train.split)?;
    let tcfg = cfg.train_config(&p.train, split.clone());
    tcfg.validate()?;
    let dir = prepare(cfg, "pretrain")?;

    let idx: Vec<usize> = (0..data.items.len()).collect();
    let vectors = exec
        .map(&idx, |_, &i| -> Result<FeatureVector> {
            let volume = data.volume(i)?;
            extract_feature_vector(&volume, &mcfg, &spec, p.patches, &p.optimizer, p.target_class, cfg.seed)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = data.items.iter().map(|i| i.id.clone()).collect();

    let tensors = vectors
        .iter()
        .map(|v| Tensor::new([v.len()], v.values.clone()))
        .collect::<Result<Vec<_>>>()?;
    write_weights(&dir.join("features.bin"), &tensors.iter().collect::<Vec<_>>())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item", "label", "patches", "coefficients", "length"]).expect("in-memory write");
    for ((v, id), label) in vectors.iter().zip(&ids).zip(&data.labels) {
        w.write_record([
            id.clone(),
            label.to_string(),
            v.patches.to_string(),
            v.coefficients.to_string(),
            v.len().to_string(),
        ])
        .expect("in-memory write");
    }
    write_text(
        &dir.join("features.csv"),
        &String::from_utf8(w.into_inner().expect("flush")).expect("utf8"),
    )?;

    let (model, curves) = train_aggregator(&vectors, &data.labels, &ids, &agg, &tcfg, exec)?;
    model.save(&dir.join("aggregator.weights"), &dir.join("aggregator.txt"))?;
    write_text(&dir.join("aggregator_curves.csv"), &curves_to_csv(&curves))?;

    let examples = aggregator_examples(&vectors, &data.labels, &ids, &agg)?;
    let (_, val) = split_examples(&examples, &split, cfg.seed)?;
    let val: Vec<&Example> = val.iter().map(|&i| &examples[i]).collect();
    let (_, _, preds) = score(&model, &val, exec)?;
    let truths: Vec<usize> = val.iter().map(|e| e.label).collect();
    let report = evaluate(&preds, &truths, mcfg.num_classes)?.with_curves(curves);
    write_text(&dir.join("report_pretrained.csv"), &report.to_csv("sequence"))?;
    Ok(Outcome {
        dir,
        messages: vec![
            format!(
                "{} feature vectors of length {} ({} patches x {} coefficients)",
                vectors.len(),
                vectors[0].len(),
                p.patches,
                vectors[0].coefficients
            ),
            format!("pre-trained sequence accuracy {:.4} over {} sequences", report.accuracy, val.len()),
        ],
    })
}

fn curves_dat(curves: &[EpochStats]) -> String {
    let mut out = String::from("# epoch train_acc val_acc train_loss val_loss\n");
    for c in curves {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            c.epoch, c.train_acc, c.val_acc, c.train_loss, c.val_loss
        ));
    }
    out
}

const PLOT_SCRIPT: &str = "\
set datafile commentschars '#'
set key bottom right
set xlabel 'epoch'
set ylabel 'accuracy'
set output 'accuracy.png'
set terminal png size 800,500
plot for [f in files] f using 1:2 with lines title f.' train', \\
     for [f in files] f using 1:3 with lines title f.' validation'
set ylabel 'cross-entropy'
set key top right
set output 'loss.png'
plot for [f in files] f using 1:4 with lines title f.' train', \\
     for [f in files] f using 1:5 with lines title f.' validation'
";

/// Converts the run's curve CSVs into gnuplot data files plus `curves.gp`.
pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome> {
    let dir = cfg.run_dir();
    let mut written = Vec::new();
    for stem in ["curves", "aggregator_curves"] {
        let src = dir.join(format!("{stem}.csv"));
        if !src.is_file() {
            continue;
        }
        let text = fs::read_to_string(&src).map_err(|e| Error::io(&src, e))?;
        let curves = curves_from_csv(&text)?;
        let name = format!("{stem}.dat");
        write_text(&dir.join(&name), &curves_dat(&curves))?;
        written.push(name);
    }
    if written.is_empty() {
        return Err(Error::Config(format!(
            "no curves.csv or aggregator_curves.csv in {}; run train or pretrain first",
            dir.display()
        )));
    }
    prepare(cfg, "report")?;
    let script = format!("files = \"{}\"\n{PLOT_SCRIPT}", written.join(" "));
    write_text(&dir.join("curves.gp"), &script)?;
    Ok(Outcome {
        dir,
        messages: vec![format!("wrote {} and curves.gp", written.join(", "))],
    })
}
