use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{
    parse_sentiment140, split, subsample_balanced, synthetic_sentiment, tokenize_and_build_vocab, Dataset, Example,
};
use crate::erosion::{apply_erosion, ErosionMethod};
use crate::error::{Error, Result};
use crate::harness::config::{DataSource, DatasetRef, ErosionTemplate, InlineTrain, ModelRef, SweepConfig};
use crate::harness::metrics::{label_divergence, mean_and_sem};
use crate::nn::{evaluate, load_model, train, Architecture, Model, TrainConfig};
use crate::tensor::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub grid_index: usize,
    pub repeat: usize,
    pub magnitude: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub label_divergence: f64,
    /// SHA-256 of the prediction vector (one byte per prediction), hex.
    pub predictions_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub erosion: ErosionTemplate,
    pub grid: Vec<f64>,
    pub repeats: usize,
    pub master_seed: u64,
    pub chance_level: f64,
    pub baseline_accuracy: f64,
    pub baseline_predictions: Vec<u8>,
    /// Ordered by `(grid_index, repeat)`.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    fn at_grid(&self, g: usize) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(move |r| r.grid_index == g)
    }

    /// `(magnitude, mean accuracy over repeats)` per grid point.
    pub fn mean_accuracy(&self) -> Vec<(f64, f64)> {
        self.grid
            .iter()
            .enumerate()
            .map(|(g, &m)| {
                let accs: Vec<f64> = self.at_grid(g).map(|r| r.accuracy).collect();
                (m, mean_and_sem(&accs).0)
            })
            .collect()
    }

    /// `(magnitude, mean, standard error)` of a per-record metric.
    pub fn summary(&self, metric: impl Fn(&SweepRecord) -> f64) -> Vec<(f64, f64, f64)> {
        self.grid
            .iter()
            .enumerate()
            .map(|(g, &m)| {
                let xs: Vec<f64> = self.at_grid(g).map(&metric).collect();
                let (mean, sem) = mean_and_sem(&xs);
                (m, mean, sem)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

pub fn predictions_digest(preds: &[u8]) -> String {
    hex::encode(Sha256::digest(preds))
}

/// Loads or generates the dataset and splits it into `(train, val)`.
pub fn load_dataset(dataset: &DatasetRef) -> Result<(Dataset, Dataset)> {
    let full = match &dataset.source {
        DataSource::Synthetic(cfg) => synthetic_sentiment(cfg, dataset.seed)?,
        DataSource::Csv(path) => {
            let file = File::open(path).map_err(|e| Error::from(e).at_path(path))?;
            let parsed = parse_sentiment140(BufReader::new(file)).map_err(|e| e.at_path(path))?;
            let mut ds = tokenize_and_build_vocab(&parsed.records, &dataset.tokenizer)?;
            ds.provenance = format!("{} ({})", ds.provenance, path.display());
            ds
        }
        DataSource::Cache(path) => Dataset::load_cache(path)?,
    };
    let full = match dataset.subsample {
        Some(ratio) => subsample_balanced(&full, ratio, dataset.seed)?,
        None => full,
    };
    split(&full, dataset.val_fraction, dataset.seed)
}

fn inline_arch(spec: &InlineTrain, vocab_size: usize) -> Architecture {
    match &spec.architecture {
        Architecture::KimCnn(c) => Architecture::KimCnn(crate::nn::KimCnnConfig {
            vocab_size,
            ..c.clone()
        }),
        Architecture::ToyAttention(c) => Architecture::ToyAttention(crate::nn::ToyAttentionConfig {
            vocab_size,
            ..c.clone()
        }),
    }
}

/// Trains an inline model on `train_set`. The optional hook overrides the
/// config's own.
pub fn train_inline(
    spec: &InlineTrain,
    vocab_size: usize,
    train_set: &[Example],
    hook: Option<crate::erosion::ErosionSpec>,
) -> Result<Model> {
    let arch = inline_arch(spec, vocab_size);
    let model = arch.build::<f32>(spec.train.seed)?;
    let config = TrainConfig {
        erosion_hook: hook.or_else(|| spec.train.erosion_hook.clone()),
        ..spec.train.clone()
    };
    Ok(train(model, train_set, &[], &config, &spec.adam)?.0)
}

/// Resolves the baseline model: loads the checkpoint or trains inline.
pub fn load_baseline(model: &ModelRef, train_set: &Dataset) -> Result<Model> {
    let m = match model {
        ModelRef::Checkpoint(path) => load_model::<f32>(path)?,
        ModelRef::Train(spec) => train_inline(spec, train_set.vocab.len(), &train_set.examples, None)?,
    };
    if m.arch.vocab_size() < train_set.vocab.len() {
        return Err(Error::invalid(format!(
            "model vocabulary ({}) is smaller than the dataset's ({})",
            m.arch.vocab_size(),
            train_set.vocab.len()
        )));
    }
    Ok(m)
}

/// Full pipeline: data, baseline, then every (grid point × repeat).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let (train_set, val_set) = load_dataset(&config.dataset)?;
    let baseline = load_baseline(&config.model, &train_set)?;
    let retrain = match &config.model {
        ModelRef::Train(spec) => Some((spec, train_set.examples.as_slice())),
        ModelRef::Checkpoint(_) => None,
    };
    sweep_model(config, &baseline, &val_set.examples, retrain)
}

/// Sweeps an already available baseline. `retrain` supplies the inline
/// training setup and data, needed only for `noise_train`.
pub fn sweep_model(
    config: &SweepConfig,
    baseline: &Model,
    val: &[Example],
    retrain: Option<(&InlineTrain, &[Example])>,
) -> Result<SweepResult> {
    config.validate()?;
    if val.is_empty() {
        return Err(Error::invalid("validation set is empty"));
    }
    let (baseline_accuracy, baseline_predictions) = evaluate(baseline, val)?;
    let jobs: Vec<(usize, usize)> = (0..config.grid.len())
        .flat_map(|g| (0..config.repeats).map(move |r| (g, r)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(g, r)| {
            let magnitude = config.grid[g];
            let seed = derive_seed(config.master_seed, &[g as u64, r as u64]);
            let spec = config.erosion.at(magnitude, seed);
            let eroded = if spec.method == ErosionMethod::NoiseTrain {
                let (inline, train_set) =
                    retrain.ok_or_else(|| Error::invalid("noise_train sweeps need an inline training setup"))?;
                train_inline(inline, baseline.arch.vocab_size(), train_set, Some(spec))?
            } else {
                baseline.with_params(apply_erosion(&baseline.params, &spec)?.0)
            };
            let (accuracy, preds) = evaluate(&eroded, val)?;
            Ok(SweepRecord {
                grid_index: g,
                repeat: r,
                magnitude,
                seed,
                accuracy,
                label_divergence: label_divergence(&baseline_predictions, &preds)?,
                predictions_digest: predictions_digest(&preds),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        erosion: config.erosion.clone(),
        grid: config.grid.clone(),
        repeats: config.repeats,
        master_seed: config.master_seed,
        chance_level: config.chance_level,
        baseline_accuracy,
        baseline_predictions,
        records,
    })
}

/// Writes `sweep.json` into `dir`.
pub fn save_sweep(result: &SweepResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
    let path = dir.join("sweep.json");
    std::fs::write(&path, result.to_json()?).map_err(|e| Error::from(e).at_path(&path))
}

/// Reads `sweep.json` from `dir`.
pub fn load_sweep(dir: impl AsRef<Path>) -> Result<SweepResult> {
    let path = dir.as_ref().join("sweep.json");
    let bytes = std::fs::read(&path).map_err(|e| Error::from(e).at_path(&path))?;
    SweepResult::from_json(&bytes).map_err(|e| e.at_path(&path))
}
