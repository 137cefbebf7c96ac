//! Top-k error and multi-trial aggregation.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::losses::LossKind;
use crate::numeric::Matrix;

/// One epoch of a training run. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub test_top1_acc: f64,
    pub test_top5_err: f64,
}

impl EpochRecord {
    pub fn test_top1_err(&self) -> f64 {
        1.0 - self.test_top1_acc
    }
}

/// Per-epoch history of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub records: Vec<EpochRecord>,
    /// FNV-1a of the initial parameters.
    pub init_checksum: u64,
    /// FNV-1a of the epoch-0 sample order (`None` for zero-epoch runs).
    pub first_epoch_checksum: Option<u64>,
}

/// Number of classes ranked strictly ahead of `label`: higher logit, or an
/// equal logit at a lower class index.
fn rank_of(row: &[f64], label: usize) -> usize {
    let target = row[label];
    row.iter()
        .enumerate()
        .filter(|&(j, &z)| z > target || (z == target && j < label))
        .count()
}

fn check_rows(logits: &Matrix, labels: &[usize]) -> Result<()> {
    if logits.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            left: logits.shape(),
            right: (labels.len(), 1),
            context: "one label per logit row",
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= logits.cols()) {
        return Err(Error::ClassOutOfRange {
            class: bad,
            num_classes: logits.cols(),
        });
    }
    Ok(())
}

/// Fraction of rows whose label is not among the `k` largest logits. Ties
/// rank the lower class index first.
pub fn top_k_error(logits: &Matrix, labels: &[usize], k: usize) -> Result<f64> {
    if k == 0 || k > logits.cols() {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", logits.cols())));
    }
    check_rows(logits, labels)?;
    let misses = labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| rank_of(logits.row(i), y) >= k)
        .count();
    Ok(misses as f64 / labels.len() as f64)
}

pub fn accuracy(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    Ok(1.0 - top_k_error(logits, labels, 1)?)
}

/// Counts of rows hit at top-1 and top-k, for accumulating over batches.
pub fn top_k_hits(logits: &Matrix, labels: &[usize], k: usize) -> Result<(usize, usize)> {
    if k == 0 || k > logits.cols() {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", logits.cols())));
    }
    check_rows(logits, labels)?;
    let mut top1 = 0;
    let mut topk = 0;
    for (i, &y) in labels.iter().enumerate() {
        let r = rank_of(logits.row(i), y);
        top1 += usize::from(r == 0);
        topk += usize::from(r < k);
    }
    Ok((top1, topk))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub per_trial: Vec<f64>,
}

pub fn mean_and_sample_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(invalid(format!(
            "sample standard deviation needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Mean and sample std across trials of the per-trial window average.
pub fn aggregate_values(per_trial: Vec<f64>) -> Result<Aggregate> {
    let (mean, std) = mean_and_sample_std(&per_trial)?;
    Ok(Aggregate { mean, std, per_trial })
}

/// Like [`aggregate_trials`] for an arbitrary per-epoch metric.
pub fn aggregate_metric(
    reports: &[TrialReport],
    window: Range<usize>,
    metric: impl Fn(&EpochRecord) -> f64,
) -> Result<Aggregate> {
    if reports.len() < 2 {
        return Err(invalid(format!(
            "aggregation needs at least 2 trials, got {}",
            reports.len()
        )));
    }
    if window.is_empty() {
        return Err(invalid(format!("empty epoch window {window:?}")));
    }
    let per_trial = reports
        .iter()
        .map(|r| {
            let records = r.records.get(window.clone()).ok_or_else(|| {
                invalid(format!(
                    "window {window:?} exceeds the {} recorded epochs of trial {}",
                    r.records.len(),
                    r.trial
                ))
            })?;
            Ok(records.iter().map(&metric).sum::<f64>() / records.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_values(per_trial)
}

/// Top-5 error averaged over `window` (0-based epochs, end exclusive) per
/// trial, then mean and sample std across trials.
pub fn aggregate_trials(reports: &[TrialReport], window: Range<usize>) -> Result<Aggregate> {
    aggregate_metric(reports, window, |r| r.test_top5_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rng;

    fn report(trial: usize, top5: &[f64]) -> TrialReport {
        TrialReport {
            trial,
            seed: trial as u64,
            loss: LossKind::CrossEntropy,
            records: top5
                .iter()
                .enumerate()
                .map(|(epoch, &e)| EpochRecord {
                    epoch,
                    lr: 0.1,
                    train_loss: 1.0,
                    test_top1_acc: 0.5,
                    test_top5_err: e,
                })
                .collect(),
            init_checksum: 0,
            first_epoch_checksum: None,
        }
    }

    /// Full stable sort of class indices by descending logit.
    fn sorted_oracle(logits: &Matrix, labels: &[usize], k: usize) -> f64 {
        let mut misses = 0;
        for (i, &y) in labels.iter().enumerate() {
            let row = logits.row(i);
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            if !order[..k].contains(&y) {
                misses += 1;
            }
        }
        misses as f64 / labels.len() as f64
    }

    #[test]
    fn top_k_examples() {
        let logits = Matrix::from_vec(1, 3, vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(top_k_error(&logits, &[2], 2).unwrap(), 1.0);
        assert_eq!(top_k_error(&logits, &[2], 3).unwrap(), 0.0);
        assert!(top_k_error(&logits, &[2], 4).is_err());
        assert!(top_k_error(&logits, &[2], 0).is_err());
        assert!(top_k_error(&logits, &[3], 1).is_err());
    }

    #[test]
    fn ties_rank_lower_index_first() {
        let logits = Matrix::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(top_k_error(&logits, &[0], 1).unwrap(), 0.0);
        assert_eq!(top_k_error(&logits, &[1], 1).unwrap(), 1.0);
        assert_eq!(top_k_error(&logits, &[2], 2).unwrap(), 1.0);
    }

    #[test]
    fn matches_sort_oracle() {
        let mut rng = Rng::new(17);
        // Coarse logits so ties actually occur.
        let logits = Matrix::from_fn(200, 10, |_, _| rng.below(6) as f64).unwrap();
        let labels: Vec<usize> = (0..200).map(|_| rng.below(10)).collect();
        let mut prev = 1.0;
        for k in 1..=10 {
            let e = top_k_error(&logits, &labels, k).unwrap();
            assert_eq!(e, sorted_oracle(&logits, &labels, k));
            assert!(e <= prev);
            prev = e;
        }
        assert_eq!(prev, 0.0);
        let (h1, h5) = top_k_hits(&logits, &labels, 5).unwrap();
        assert_eq!(1.0 - h1 as f64 / 200.0, top_k_error(&logits, &labels, 1).unwrap());
        assert_eq!(1.0 - h5 as f64 / 200.0, top_k_error(&logits, &labels, 5).unwrap());
    }

    #[test]
    fn table_aggregation() {
        let ce = aggregate_values(vec![6.8, 6.6, 6.8, 6.6, 6.7]).unwrap();
        assert!((ce.mean - 6.7).abs() < 1e-12);
        assert!((ce.std - 0.1).abs() < 1e-12);
        let adp = aggregate_values(vec![6.2, 6.2, 6.1, 6.5, 6.2]).unwrap();
        assert!((adp.mean - 6.24).abs() < 1e-12);
        assert!((adp.std - 0.023f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn window_average_per_trial() {
        let reports = vec![report(0, &[9.0, 1.0, 3.0]), report(1, &[9.0, 3.0, 5.0])];
        let agg = aggregate_trials(&reports, 1..3).unwrap();
        assert_eq!(agg.per_trial, vec![2.0, 4.0]);
        assert_eq!(agg.mean, 3.0);
        assert!((agg.std - 2f64.sqrt()).abs() < 1e-15);
        assert!(aggregate_trials(&reports, 1..4).is_err());
        assert!(aggregate_trials(&reports, 2..2).is_err());
        assert!(aggregate_trials(&reports[..1], 0..1).is_err());
    }

    #[test]
    fn identical_trials_have_zero_std() {
        let reports = vec![report(0, &[0.3; 4]), report(1, &[0.3; 4]), report(2, &[0.3; 4])];
        assert_eq!(aggregate_trials(&reports, 0..4).unwrap().std, 0.0);
    }
}
