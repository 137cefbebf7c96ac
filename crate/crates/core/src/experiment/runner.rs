use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{DatasetConfig, ExperimentConfig};
use super::report;
use crate::data::{
    augment, compute_mean, epoch_plan, parse_cifar100_file, subtract_mean, BlobCenters, DataKind,
    Dataset, MeanImage,
};
use crate::error::{Error, Result};
use crate::losses::{batch_loss, LossKind};
use crate::metrics::{aggregate_metric, aggregate_trials, top_k_hits, Aggregate, EpochRecord, TrialReport};
use crate::network::{init_model, MlpModel};
use crate::numeric::{Matrix, Rng};
use crate::optim::{step_lr, Sgd};

/// Train and test splits, ready for training.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Raw (un-centered) training examples; augmentation runs on these.
    pub train: Dataset,
    /// Test examples with the training mean already subtracted.
    pub test: Dataset,
    pub mean: MeanImage,
}

fn truncate(ds: Dataset, limit: Option<usize>) -> Result<Dataset> {
    match limit {
        Some(n) if n < ds.len() => {
            let idx: Vec<usize> = (0..n).collect();
            Dataset::new(
                ds.features().select_rows(&idx)?,
                ds.labels()[..n].to_vec(),
                ds.num_classes(),
                ds.kind(),
            )
        }
        _ => Ok(ds),
    }
}

/// Reads or generates the raw train/test splits. Synthetic data comes from
/// the root stream of `seed`, which trials never touch.
pub fn load_raw(cfg: &DatasetConfig, seed: u64) -> Result<(Dataset, Dataset)> {
    match cfg {
        DatasetConfig::Synthetic {
            classes,
            per_class,
            test_per_class,
            dim,
            spread,
        } => {
            let mut rng = Rng::new(seed);
            let centers = BlobCenters::place(&mut rng, *classes, *dim, *spread)?;
            let train = centers.sample(&mut rng, *per_class)?;
            let test = centers.sample(&mut rng, *test_per_class)?;
            Ok((train, test))
        }
        DatasetConfig::Cifar100 {
            train_path,
            test_path,
            limit_train,
            limit_test,
        } => Ok((
            truncate(parse_cifar100_file(train_path)?, *limit_train)?,
            truncate(parse_cifar100_file(test_path)?, *limit_test)?,
        )),
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let (train, test) = load_raw(&cfg.dataset, cfg.seed)?;
    let mean = compute_mean(&train);
    let test = subtract_mean(&test, &mean)?;
    Ok(PreparedData { train, test, mean })
}

/// Generators for one trial. Both losses of a paired comparison get the same
/// trial index and therefore identical streams.
struct TrialStreams {
    init: Rng,
    order: Rng,
    augment: Rng,
}

impl TrialStreams {
    fn new(seed: u64, trial: usize) -> Self {
        let root = Rng::child(seed, trial as u64);
        Self {
            init: root.derive(0),
            order: root.derive(1),
            augment: root.derive(2),
        }
    }
}

fn gather_batch(
    data: &PreparedData,
    idx: &[usize],
    augment_images: bool,
    rng: &mut Rng,
) -> Result<(Matrix, Vec<usize>)> {
    let train = &data.train;
    let d = train.dim();
    let mut buf = Vec::with_capacity(idx.len() * d);
    for &i in idx {
        let row = train.features().row(i);
        match train.kind() {
            DataKind::Image { .. } if augment_images => buf.extend(augment(row, train.kind(), rng)?),
            _ => buf.extend_from_slice(row),
        }
    }
    data.mean.subtract_rows(&mut buf)?;
    let labels = idx.iter().map(|&i| train.labels()[i]).collect();
    Ok((Matrix::from_vec(idx.len(), d, buf)?, labels))
}

/// Top-1 accuracy and top-k error on `test`, with `k = min(5, C)`.
pub fn evaluate(model: &MlpModel, test: &Dataset, batch_size: usize) -> Result<(f64, f64)> {
    let k = 5.min(test.num_classes());
    let (mut top1, mut topk) = (0, 0);
    let all: Vec<usize> = (0..test.len()).collect();
    for idx in all.chunks(batch_size) {
        let x = test.features().select_rows(idx)?;
        let labels: Vec<usize> = idx.iter().map(|&i| test.labels()[i]).collect();
        let (h1, hk) = top_k_hits(&model.infer(&x)?, &labels, k)?;
        top1 += h1;
        topk += hk;
    }
    let n = test.len() as f64;
    Ok((top1 as f64 / n, 1.0 - topk as f64 / n))
}

/// Runs one seeded trial of `loss` on prepared data.
pub fn train_trial(cfg: &ExperimentConfig, data: &PreparedData, loss: LossKind, trial: usize) -> Result<TrialReport> {
    cfg.validate()?;
    if data.train.is_empty() || data.test.is_empty() {
        return Err(Error::Config("train and test sets must be non-empty".into()));
    }
    let dims = cfg.resolved_dims(data.train.dim(), data.train.num_classes())?;
    let mut streams = TrialStreams::new(cfg.seed, trial);
    let mut model = init_model(&dims, &mut streams.init)?;
    let init_checksum = model.checksum();
    let mut optimizer = Sgd::new(cfg.sgd, &model)?;

    let mut records = Vec::with_capacity(cfg.epochs);
    let mut first_epoch_checksum = None;
    for epoch in 0..cfg.epochs {
        let lr = step_lr(&cfg.sgd, epoch as i64)?;
        let plan = epoch_plan(data.train.len(), cfg.batch_size, &mut streams.order)?;
        if epoch == 0 {
            first_epoch_checksum = Some(plan.checksum());
        }
        let mut total = 0.0;
        for (b, idx) in plan.batches().iter().enumerate() {
            let mut step = || -> Result<f64> {
                let (x, labels) = gather_batch(data, idx, cfg.augment, &mut streams.augment)?;
                let logits = model.forward(&x)?;
                let out = batch_loss(loss, &logits, &labels)?;
                if !out.mean.is_finite() {
                    return Err(Error::NonFinite("batch loss".into()));
                }
                let grads = model.backward(&out.grad_logits)?;
                optimizer.step(&mut model, &grads, lr)?;
                Ok(out.mean)
            };
            let mean = step().map_err(|e| match e {
                Error::NonFinite(_) => Error::Diverged { epoch, batch: b },
                other => other,
            })?;
            total += mean * idx.len() as f64;
        }
        let (test_top1_acc, test_top5_err) = evaluate(&model, &data.test, cfg.batch_size)?;
        records.push(EpochRecord {
            epoch,
            lr,
            train_loss: total / data.train.len() as f64,
            test_top1_acc,
            test_top5_err,
        });
    }
    Ok(TrialReport {
        trial,
        seed: cfg.seed,
        loss,
        records,
        init_checksum,
        first_epoch_checksum,
    })
}

pub fn csv_path(out: &Path, loss: LossKind, trial: usize) -> PathBuf {
    out.join(format!("{}_trial{}.csv", loss.name(), trial + 1))
}

/// One seeded run of `cfg.loss`, written to `<out>/<loss>_trial1.csv`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<(TrialReport, PathBuf)> {
    cfg.validate()?;
    let data = prepare(cfg)?;
    let report = train_trial(cfg, &data, cfg.loss, 0)?;
    std::fs::create_dir_all(&cfg.out)?;
    let path = csv_path(&cfg.out, cfg.loss, 0);
    report::write_trial_csv(&path, &report.records)?;
    Ok((report, path))
}

#[derive(Debug, Clone, Serialize)]
pub struct LossSummary {
    pub loss: LossKind,
    /// Window-averaged top-5 error (fraction), across trials.
    pub top5_err: Aggregate,
    pub top1_acc: Aggregate,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub window: [usize; 2],
    pub trials: usize,
    pub blocks: Vec<LossSummary>,
    /// Every trial index saw identical initial weights and epoch-0 order
    /// under both losses.
    pub paired: bool,
    /// Adaptive mean top-5 error ≤ cross-entropy mean.
    pub adaptive_not_worse: bool,
    #[serde(skip)]
    pub reports: Vec<TrialReport>,
}

impl CompareSummary {
    pub fn block(&self, loss: LossKind) -> Option<&LossSummary> {
        self.blocks.iter().find(|b| b.loss == loss)
    }
}

fn run_jobs(cfg: &ExperimentConfig, data: &PreparedData, jobs: &[(LossKind, usize)]) -> Result<Vec<TrialReport>> {
    if cfg.threads <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(|&(loss, t)| train_trial(cfg, data, loss, t)).collect();
    }
    let per_worker = jobs.len().div_ceil(cfg.threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(per_worker)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&(loss, t)| train_trial(cfg, data, loss, t))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(jobs.len());
        for h in handles {
            out.extend(h.join().expect("trial worker panicked")?);
        }
        Ok(out)
    })
}

/// `cfg.trials` paired trials per loss, aggregated over the configured window.
///
/// Writes one CSV per (loss, trial), `checksums.csv`, `summary.txt` and
/// `summary.json` into `cfg.out`.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareSummary> {
    cfg.validate_for_compare()?;
    let data = prepare(cfg)?;
    let jobs: Vec<(LossKind, usize)> = LossKind::ALL
        .iter()
        .flat_map(|&loss| (0..cfg.trials).map(move |t| (loss, t)))
        .collect();
    let reports = run_jobs(cfg, &data, &jobs)?;

    let window = cfg.resolved_window();
    let blocks = LossKind::ALL
        .iter()
        .map(|&loss| {
            let mine: Vec<TrialReport> = reports.iter().filter(|r| r.loss == loss).cloned().collect();
            Ok(LossSummary {
                loss,
                top5_err: aggregate_trials(&mine, window.clone())?,
                top1_acc: aggregate_metric(&mine, window.clone(), |r| r.test_top1_acc)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let paired = (0..cfg.trials).all(|t| {
        let pair: Vec<&TrialReport> = reports.iter().filter(|r| r.trial == t).collect();
        pair.windows(2).all(|w| {
            w[0].init_checksum == w[1].init_checksum && w[0].first_epoch_checksum == w[1].first_epoch_checksum
        })
    });
    let ce = blocks[0].top5_err.mean;
    let adp = blocks[1].top5_err.mean;
    let summary = CompareSummary {
        window: [window.start, window.end],
        trials: cfg.trials,
        blocks,
        paired,
        adaptive_not_worse: adp <= ce,
        reports,
    };

    std::fs::create_dir_all(&cfg.out)?;
    for r in &summary.reports {
        report::write_trial_csv(&csv_path(&cfg.out, r.loss, r.trial), &r.records)?;
    }
    report::write_checksums(&cfg.out.join("checksums.csv"), &summary.reports)?;
    std::fs::write(cfg.out.join("summary.txt"), report::format_table(&summary))?;
    std::fs::write(cfg.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Dataset statistics for `inspect-data`.
#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub split: &'static str,
    pub examples: usize,
    pub classes: usize,
    pub dim: usize,
    pub image: bool,
    pub min_class_count: usize,
    pub max_class_count: usize,
    pub feature_min: f64,
    pub feature_max: f64,
    pub feature_mean: f64,
}

pub fn summarize(split: &'static str, ds: &Dataset) -> DataSummary {
    let counts = ds.class_counts();
    let values = ds.features().data();
    DataSummary {
        split,
        examples: ds.len(),
        classes: ds.num_classes(),
        dim: ds.dim(),
        image: matches!(ds.kind(), DataKind::Image { .. }),
        min_class_count: counts.iter().copied().min().unwrap_or(0),
        max_class_count: counts.iter().copied().max().unwrap_or(0),
        feature_min: values.iter().copied().fold(f64::INFINITY, f64::min),
        feature_max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        feature_mean: values.iter().sum::<f64>() / values.len() as f64,
    }
}

pub fn cmd_inspect_data(cfg: &DatasetConfig, seed: u64) -> Result<Vec<DataSummary>> {
    let (train, test) = load_raw(cfg, seed)?;
    Ok(vec![summarize("train", &train), summarize("test", &test)])
}
