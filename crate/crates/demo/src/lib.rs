//! WebAssembly bindings for the static page in `www/`. Every export returns
//! a JSON string; the plain Rust functions behind them are usable natively.

use std::path::PathBuf;

use lace_core::experiment::{cmd_eval_loss, prepare, train_trial, DatasetConfig, ExperimentConfig, LossEvaluation};
use lace_core::losses::gradient_scale_factor;
use lace_core::optim::SgdConfig;
use lace_core::{LossKind, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub q: Vec<f64>,
    pub cross_entropy: Vec<f64>,
    pub adaptive: Vec<f64>,
    /// Adaptive gradient magnitude relative to cross entropy.
    pub scale_factor: Vec<f64>,
}

/// Both losses and `k(q)` on `points` evenly spaced values of `q_c` in (0, 1].
pub fn curves(points: usize) -> Result<Curves> {
    let n = points.max(2);
    let q: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(Curves {
        cross_entropy: q.iter().map(|&p| -p.ln()).collect(),
        adaptive: q.iter().map(|&p| -(1.0 - p) * p.ln()).collect(),
        scale_factor: q.iter().map(|&p| gradient_scale_factor(p)).collect::<Result<_>>()?,
        q,
    })
}

pub fn evaluate(logits: &str, class: usize) -> Result<LossEvaluation> {
    let z = logits
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| lace_core::Error::InvalidArgument(format!("bad logit {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    cmd_eval_loss(&z, class)
}

#[derive(Debug, Serialize)]
pub struct RaceCurve {
    pub loss: LossKind,
    pub train_loss: Vec<f64>,
    pub test_top1_acc: Vec<f64>,
}

/// Same seed, same data order, one run per loss on 2-D blobs.
pub fn race(classes: usize, spread: f64, epochs: usize, seed: u64) -> Result<Vec<RaceCurve>> {
    let cfg = ExperimentConfig {
        dataset: DatasetConfig::Synthetic {
            classes,
            per_class: 100,
            test_per_class: 50,
            dim: 2,
            spread,
        },
        dims: Some(vec![2, 32, classes]),
        epochs,
        batch_size: 50,
        sgd: SgdConfig {
            lr0: 0.05,
            step_size: epochs.max(1),
            ..Default::default()
        },
        seed,
        augment: false,
        out: PathBuf::new(),
        ..Default::default()
    };
    let data = prepare(&cfg)?;
    LossKind::ALL
        .into_iter()
        .map(|loss| {
            let r = train_trial(&cfg, &data, loss, 0)?;
            Ok(RaceCurve {
                loss,
                train_loss: r.records.iter().map(|e| e.train_loss).collect(),
                test_top1_acc: r.records.iter().map(|e| e.test_top1_acc).collect(),
            })
        })
        .collect()
}

fn to_js<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsError> {
    value
        .and_then(|v| Ok(serde_json::to_string(&v)?))
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn loss_curves(points: usize) -> std::result::Result<String, JsError> {
    to_js(curves(points))
}

#[wasm_bindgen]
pub fn eval_logits(logits: &str, class: usize) -> std::result::Result<String, JsError> {
    to_js(evaluate(logits, class))
}

#[wasm_bindgen]
pub fn train_blobs(classes: usize, spread: f64, epochs: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_js(race(classes, spread, epochs, seed))
}
