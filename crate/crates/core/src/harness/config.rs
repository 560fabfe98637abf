use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{SyntheticConfig, TokenizerConfig};
use crate::erosion::{ErosionMethod, ErosionSpec, TargetSelector};
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, Architecture, TrainConfig};

/// Chance accuracy of a balanced binary task.
pub const BINARY_CHANCE: f64 = 0.5;

/// σ used by the layer-selectivity ablation.
pub const ABLATION_SIGMA: f64 = 0.1;

/// Nine noise levels, 10⁻⁴ to 10⁰ in half-decade steps, ascending.
pub fn noise_grid_default() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-4.0 + 0.5 * k as f64)).collect()
}

/// Where the baseline model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRef {
    Checkpoint(PathBuf),
    Train(InlineTrain),
}

/// Train a fresh baseline before sweeping. The architecture's vocabulary size
/// is overridden by the dataset's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTrain {
    pub architecture: Architecture,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub adam: AdamConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    /// A Sentiment140-format CSV file.
    Csv(PathBuf),
    /// A dataset cache written by [`crate::data::Dataset::save_cache`].
    Cache(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub source: DataSource,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    /// Seeds generation, subsampling and the split.
    #[serde(default)]
    pub seed: u64,
    /// Balanced subsample ratio applied before splitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<f64>,
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
}

fn default_val_fraction() -> f64 {
    0.1
}

impl DatasetRef {
    pub fn synthetic(config: SyntheticConfig, seed: u64) -> Self {
        DatasetRef {
            source: DataSource::Synthetic(config),
            val_fraction: default_val_fraction(),
            seed,
            subsample: None,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

/// An erosion spec with its magnitude left open.
///
/// Single-knob methods take the swept magnitude as their only knob. Combos
/// fix one knob here and sweep the other: `sweep_fraction = true` sweeps the
/// fraction and keeps `sigma`, otherwise the reverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErosionTemplate {
    pub method: ErosionMethod,
    pub selector: TargetSelector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default)]
    pub sweep_fraction: bool,
}

impl ErosionTemplate {
    pub fn new(method: ErosionMethod, selector: TargetSelector) -> Self {
        ErosionTemplate {
            method,
            selector,
            sigma: None,
            fraction: None,
            sweep_fraction: false,
        }
    }

    fn is_combo(&self) -> bool {
        self.method.uses_sigma() && self.method.uses_fraction()
    }

    /// Whether the swept magnitude is a fraction (else a σ).
    pub fn sweeps_fraction(&self) -> bool {
        if self.is_combo() {
            self.sweep_fraction
        } else {
            self.method.uses_fraction()
        }
    }

    pub fn at(&self, magnitude: f64, seed: u64) -> ErosionSpec {
        let mut spec = ErosionSpec {
            method: self.method,
            selector: self.selector.clone(),
            sigma: self.sigma.filter(|_| self.is_combo()),
            fraction: self.fraction.filter(|_| self.is_combo()),
            seed,
        };
        if self.sweeps_fraction() {
            spec.fraction = Some(magnitude);
        } else {
            spec.sigma = Some(magnitude);
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_combo() {
            let fixed_ok = if self.sweep_fraction {
                self.sigma.is_some()
            } else {
                self.fraction.is_some()
            };
            if !fixed_ok {
                return Err(Error::invalid(format!(
                    "{} template must fix the knob that is not swept",
                    self.method
                )));
            }
        } else if self.sigma.is_some() || self.fraction.is_some() {
            return Err(Error::invalid(format!(
                "{} template takes its magnitude from the grid",
                self.method
            )));
        }
        self.at(0.0, 0).validate()
    }
}

/// A full sweep description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelRef,
    pub dataset: DatasetRef,
    pub erosion: ErosionTemplate,
    pub grid: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_chance")]
    pub chance_level: f64,
}

fn default_repeats() -> usize {
    3
}

fn default_chance() -> f64 {
    BINARY_CHANCE
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("grid must not be empty"));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("grid must be sorted strictly ascending"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        self.erosion.validate()?;
        for &m in &self.grid {
            self.erosion.at(m, 0).validate()?;
        }
        if self.erosion.method == ErosionMethod::NoiseTrain && !matches!(self.model, ModelRef::Train(_)) {
            return Err(Error::invalid(
                "noise_train sweeps retrain, so the model must be trained inline",
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SweepConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
        let mut config = Self::from_toml(&text).map_err(|e| e.at_path(path))?;
        if let Some(base) = path.parent() {
            config.resolve_relative(base);
        }
        Ok(config)
    }

    fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ModelRef::Checkpoint(p) = &mut self.model {
            fix(p);
        }
        if let DataSource::Csv(p) | DataSource::Cache(p) = &mut self.dataset.source {
            fix(p);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Config file of the `train` subcommand. The data source itself comes from
/// the command line; `[data]` says how to prepare it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub architecture: Architecture,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub data: DataOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataOptions {
    pub val_fraction: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<f64>,
    pub tokenizer: TokenizerConfig,
    /// Used when the source is `synthetic`.
    pub synthetic: SyntheticConfig,
}

impl Default for DataOptions {
    fn default() -> Self {
        DataOptions {
            val_fraction: default_val_fraction(),
            seed: 0,
            subsample: None,
            tokenizer: TokenizerConfig::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

impl DataOptions {
    /// `synthetic`, a `.csv` file in Sentiment140 format, or a dataset cache.
    pub fn dataset_ref(&self, source: &str) -> DatasetRef {
        let source = if source == "synthetic" {
            DataSource::Synthetic(self.synthetic.clone())
        } else if Path::new(source)
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            DataSource::Csv(source.into())
        } else {
            DataSource::Cache(source.into())
        };
        DatasetRef {
            source,
            val_fraction: self.val_fraction,
            seed: self.seed,
            subsample: self.subsample,
            tokenizer: self.tokenizer.clone(),
        }
    }
}

impl TrainFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
        Self::from_toml(&text).map_err(|e| e.at_path(path))
    }

    pub fn inline(&self) -> InlineTrain {
        InlineTrain {
            architecture: self.architecture.clone(),
            train: self.train.clone(),
            adam: self.adam,
        }
    }
}
