use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::optim::SgdConfig;

/// Where the examples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Gaussian blobs; train and test share the same centers.
    Synthetic {
        classes: usize,
        per_class: usize,
        test_per_class: usize,
        dim: usize,
        spread: f64,
    },
    /// Local CIFAR-100 binary files (`train.bin`, `test.bin`).
    Cifar100 {
        train_path: PathBuf,
        test_path: PathBuf,
        /// Keep only the first N training records.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit_train: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit_test: Option<usize>,
    },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Synthetic {
            classes: 10,
            per_class: 200,
            test_per_class: 100,
            dim: 32,
            spread: 0.8,
        }
    }
}

impl DatasetConfig {
    /// `(feature dim, classes)` as far as they are known without reading files.
    pub fn shape_hint(&self) -> Option<(usize, usize)> {
        match self {
            DatasetConfig::Synthetic { classes, dim, .. } => Some((*dim, *classes)),
            DatasetConfig::Cifar100 { .. } => Some((crate::data::CIFAR_IMAGE, 100)),
        }
    }
}

/// Full description of a run. Every field has a default; JSON files may set
/// any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    /// Layer widths from input to logits. Defaults to `[dim, 64, classes]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub loss: LossKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub sgd: SgdConfig,
    pub trials: usize,
    pub seed: u64,
    /// `[start, end)` epochs averaged for the summary; defaults to the last
    /// ten epochs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    /// Random flip and pad-crop for image data.
    pub augment: bool,
    /// Worker threads for `compare`; 1 runs trials sequentially.
    pub threads: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            dims: None,
            loss: LossKind::CrossEntropy,
            epochs: 200,
            batch_size: 100,
            sgd: SgdConfig::default(),
            trials: 5,
            seed: 0,
            window: None,
            augment: true,
            threads: 1,
            out: PathBuf::from("runs"),
        }
    }
}

pub const DEFAULT_HIDDEN: usize = 64;

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Layer widths for a dataset with `dim` features and `classes` classes.
    pub fn resolved_dims(&self, dim: usize, classes: usize) -> Result<Vec<usize>> {
        let dims = self
            .dims
            .clone()
            .unwrap_or_else(|| vec![dim, DEFAULT_HIDDEN, classes]);
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!("invalid dims {dims:?}")));
        }
        if dims[0] != dim || dims[dims.len() - 1] != classes {
            return Err(Error::Config(format!(
                "dims {dims:?} must start at the feature dim {dim} and end at {classes} classes"
            )));
        }
        Ok(dims)
    }

    pub fn resolved_window(&self) -> Range<usize> {
        match self.window {
            Some([start, end]) => start..end,
            None => self.epochs.saturating_sub(10)..self.epochs,
        }
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<()> {
        self.sgd.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        match &self.dataset {
            DatasetConfig::Synthetic {
                classes,
                per_class,
                test_per_class,
                dim,
                spread,
            } => {
                if *classes < 2 || *per_class == 0 || *test_per_class == 0 || *dim == 0 {
                    return Err(Error::Config(format!(
                        "synthetic dataset needs classes ≥ 2 and positive sizes, got {:?}",
                        self.dataset
                    )));
                }
                if !(*spread > 0.0 && spread.is_finite()) {
                    return Err(Error::Config(format!("spread must be positive, got {spread}")));
                }
            }
            DatasetConfig::Cifar100 {
                limit_train, limit_test, ..
            } => {
                if *limit_train == Some(0) || *limit_test == Some(0) {
                    return Err(Error::Config("dataset limits must be positive".into()));
                }
            }
        }
        if let Some((dim, classes)) = self.dataset.shape_hint() {
            self.resolved_dims(dim, classes)?;
        }
        if let Some([start, end]) = self.window {
            if start >= end || end > self.epochs {
                return Err(Error::Config(format!(
                    "window [{start}, {end}) must be non-empty and within {} epochs",
                    self.epochs
                )));
            }
        }
        Ok(())
    }

    /// Extra checks for multi-trial comparisons.
    pub fn validate_for_compare(&self) -> Result<()> {
        self.validate()?;
        if self.trials < 2 {
            return Err(Error::Config(format!(
                "compare needs at least 2 trials, got {}",
                self.trials
            )));
        }
        if self.resolved_window().is_empty() {
            return Err(Error::Config("compare needs at least one epoch".into()));
        }
        Ok(())
    }
}
