//! Datasets: CIFAR-100 binary files, synthetic Gaussian blobs, per-feature
//! mean subtraction, image augmentation, and seeded mini-batching.
//!
//! The training pipeline is parse → scale to `[0, 1]` → augment (train
//! only) → subtract the training mean. The mean is computed once on the
//! un-augmented training images.

mod augment;
mod blobs;
mod cifar;

pub use augment::{augment, augment_with, flip_horizontal, CropWindow, PAD};
pub use blobs::{synthetic_blobs, BlobCenters};
pub use cifar::{encode_cifar100, parse_cifar100, parse_cifar100_file, parse_records, CIFAR_IMAGE, CIFAR_RECORD};

use crate::error::{invalid, Error, Result};
use crate::numeric::{Fnv1a, Matrix, Rng};

/// Layout of a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// Channel-major planes, row-major within each plane.
    Image {
        channels: usize,
        height: usize,
        width: usize,
    },
    Flat,
}

impl DataKind {
    pub const CIFAR: DataKind = DataKind::Image {
        channels: 3,
        height: 32,
        width: 32,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
    kind: DataKind,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize, kind: DataKind) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(invalid(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if num_classes < 2 {
            return Err(invalid(format!("need at least 2 classes, got {num_classes}")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::ClassOutOfRange {
                class: bad,
                num_classes,
            });
        }
        if let DataKind::Image {
            channels,
            height,
            width,
        } = kind
        {
            if channels * height * width != features.cols() {
                return Err(invalid(format!(
                    "image kind {channels}x{height}x{width} does not match {} features",
                    features.cols()
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            kind,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Per-feature training-set means.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanImage(Vec<f64>);

impl MeanImage {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Subtracts the means from every row of `features` in place.
    pub fn subtract_rows(&self, features: &mut [f64]) -> Result<()> {
        let d = self.0.len();
        if !features.len().is_multiple_of(d) {
            return Err(invalid(format!(
                "buffer of {} values is not a whole number of {d}-feature rows",
                features.len()
            )));
        }
        for row in features.chunks_exact_mut(d) {
            for (x, m) in row.iter_mut().zip(&self.0) {
                *x -= m;
            }
        }
        Ok(())
    }
}

pub fn compute_mean(train: &Dataset) -> MeanImage {
    let n = train.len() as f64;
    MeanImage(train.features.column_sums().into_iter().map(|s| s / n).collect())
}

/// Copy of `ds` with `mean` subtracted from every feature row.
pub fn subtract_mean(ds: &Dataset, mean: &MeanImage) -> Result<Dataset> {
    if mean.dim() != ds.dim() {
        return Err(Error::ShapeMismatch {
            left: ds.features.shape(),
            right: (1, mean.dim()),
            context: "mean image dimension",
        });
    }
    let mut data = ds.features.data().to_vec();
    mean.subtract_rows(&mut data)?;
    Ok(Dataset {
        features: Matrix::from_vec(ds.len(), ds.dim(), data)?,
        labels: ds.labels.clone(),
        num_classes: ds.num_classes,
        kind: ds.kind,
    })
}

/// One epoch of shuffled batches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    batches: Vec<Vec<usize>>,
}

impl EpochPlan {
    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.batches.iter().map(Vec::len).collect()
    }

    /// FNV-1a over the visiting order, for paired-run comparisons.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv1a::new();
        for &i in self.batches.iter().flatten() {
            h.write_u64(i as u64);
        }
        h.finish()
    }
}

/// Seeded shuffle of `0..n` cut into consecutive batches; the last short
/// batch is kept.
pub fn epoch_plan(n: usize, batch_size: usize, rng: &mut Rng) -> Result<EpochPlan> {
    if n == 0 {
        return Err(invalid("cannot batch an empty dataset"));
    }
    if batch_size == 0 {
        return Err(invalid("batch_size must be at least 1"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    Ok(EpochPlan {
        batches: order.chunks(batch_size).map(<[usize]>::to_vec).collect(),
    })
}

/// Materialized batches `(features, labels)` for one epoch of `ds`.
pub fn batches(ds: &Dataset, batch_size: usize, rng: &mut Rng) -> Result<Vec<(Matrix, Vec<usize>)>> {
    let plan = epoch_plan(ds.len(), batch_size, rng)?;
    plan.batches
        .iter()
        .map(|idx| {
            Ok((
                ds.features.select_rows(idx)?,
                idx.iter().map(|&i| ds.labels[i]).collect(),
            ))
        })
        .collect()
}
