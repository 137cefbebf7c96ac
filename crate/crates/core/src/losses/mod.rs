//! Softmax, cross entropy and the linearly adaptive cross entropy, plus the
//! divergences the adaptive loss is derived from.
//!
//! Losses take logits. The log-probability of the true class is computed in
//! log-sum-exp form, `ln q_c = z_c - m - ln Σ exp(z_j - m)` with `m = max z`,
//! and clamped at `ln 1e-12` so an underflowed softmax never yields `-inf`.
//! At the clamp the gradient is evaluated with the clamped `q_c`.
//!
//! Gradients with respect to the logits:
//!
//! ```text
//! CE:   g_i = q_i - δ_ic
//! Adp:  g_i = (q_c ln q_c + q_c - 1)(δ_ic - q_i) = k(q_c) (q_i - δ_ic)
//! ```
//!
//! The adaptive path reuses the cross-entropy quantities and adds one
//! subtraction (`1 - q_c`) and one multiplication per sample for the value.

mod divergence;
pub mod gradcheck;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::Matrix;

pub use divergence::{jeffreys_divergence, jeffreys_one_hot_decomposition, kl_divergence, smoothed_one_hot};

/// Floor applied to `q_c` before taking its logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over `C ≥ 2` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid(format!("need at least 2 classes, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid(format!("entry {i} = {} is not a probability", values[i])));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, c: ClassIndex) -> f64 {
        self.0[c.0]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// True class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassIndex(pub usize);

impl ClassIndex {
    pub fn checked(self, num_classes: usize) -> Result<Self> {
        if self.0 >= num_classes {
            return Err(Error::ClassOutOfRange {
                class: self.0,
                num_classes,
            });
        }
        Ok(self)
    }
}

impl From<usize> for ClassIndex {
    fn from(c: usize) -> Self {
        Self(c)
    }
}

/// Loss value (nats) and its gradient with respect to the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub value: f64,
    pub grad_logits: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    CrossEntropy,
    Adaptive,
}

impl LossKind {
    pub const ALL: [LossKind; 2] = [LossKind::CrossEntropy, LossKind::Adaptive];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::CrossEntropy => "cross_entropy",
            LossKind::Adaptive => "adaptive",
        }
    }

    pub fn evaluate(self, logits: &[f64], c: ClassIndex) -> Result<LossOutput> {
        match self {
            LossKind::CrossEntropy => cross_entropy(logits, c),
            LossKind::Adaptive => adaptive_cross_entropy(logits, c),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross_entropy" | "ce" => Ok(LossKind::CrossEntropy),
            "adaptive" | "adp" => Ok(LossKind::Adaptive),
            other => Err(invalid(format!(
                "unknown loss `{other}` (expected cross_entropy or adaptive)"
            ))),
        }
    }
}

/// Shared forward quantities for one logit row.
struct Softmaxed {
    probs: Vec<f64>,
    /// `ln q_c`, already clamped at `ln PROB_FLOOR`.
    log_qc: f64,
    /// `q_c`, already clamped at `PROB_FLOOR`.
    qc: f64,
}

fn check_logits(logits: &[f64]) -> Result<()> {
    if logits.len() < 2 {
        return Err(invalid(format!("need at least 2 logits, got {}", logits.len())));
    }
    if let Some(i) = logits.iter().position(|z| !z.is_finite()) {
        return Err(Error::NonFinite(format!("logit {i} is {}", logits[i])));
    }
    Ok(())
}

fn softmax_parts(logits: &[f64], c: ClassIndex) -> Result<Softmaxed> {
    check_logits(logits)?;
    let c = c.checked(logits.len())?;
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    let log_qc = (logits[c.0] - m - sum.ln()).max(PROB_FLOOR.ln());
    let qc = probs[c.0].max(PROB_FLOOR);
    Ok(Softmaxed { probs, log_qc, qc })
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Result<ProbVector> {
    check_logits(logits)?;
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    Ok(ProbVector(probs))
}

/// Standard cross entropy `-ln q_c`.
pub fn cross_entropy(logits: &[f64], c: ClassIndex) -> Result<LossOutput> {
    let s = softmax_parts(logits, c)?;
    let mut grad = s.probs;
    grad[c.0] -= 1.0;
    Ok(LossOutput {
        value: -s.log_qc,
        grad_logits: grad,
    })
}

/// Linearly adaptive cross entropy `-(1 - q_c) ln q_c`.
pub fn adaptive_cross_entropy(logits: &[f64], c: ClassIndex) -> Result<LossOutput> {
    let s = softmax_parts(logits, c)?;
    let ce = -s.log_qc;
    let value = (1.0 - s.qc) * ce;
    // dL/dq_c · q_c, with the δ_ic - q_i factor applied per coordinate.
    let coeff = s.qc * s.log_qc + s.qc - 1.0;
    let mut grad = s.probs;
    for g in &mut grad {
        *g *= -coeff;
    }
    grad[c.0] += coeff;
    Ok(LossOutput {
        value,
        grad_logits: grad,
    })
}

/// `k(q) = 1 - q - q ln q`: adaptive gradient = `k(q_c)` × cross-entropy gradient.
pub fn gradient_scale_factor(qc: f64) -> Result<f64> {
    if !(qc > 0.0 && qc <= 1.0) {
        return Err(invalid(format!("q_c must lie in (0, 1], got {qc}")));
    }
    Ok(1.0 - qc - qc * qc.ln())
}

/// Mean loss over a batch together with the per-sample logit gradients.
#[derive(Debug, Clone)]
pub struct BatchLoss {
    pub mean: f64,
    /// One row per sample, not divided by the batch size.
    pub grad_logits: Matrix,
}

/// Evaluates `kind` row by row. The reported value is the batch mean; the
/// gradient rows are per-sample, and the mean reduction is applied by
/// [`crate::network::MlpModel::backward`].
pub fn batch_loss(kind: LossKind, logits: &Matrix, labels: &[usize]) -> Result<BatchLoss> {
    if labels.len() != logits.rows() {
        return Err(Error::ShapeMismatch {
            left: logits.shape(),
            right: (labels.len(), 1),
            context: "one label per logit row",
        });
    }
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(logits.rows() * logits.cols());
    for (i, &label) in labels.iter().enumerate() {
        let out = kind.evaluate(logits.row(i), ClassIndex(label))?;
        total += out.value;
        grad.extend(out.grad_logits);
    }
    Ok(BatchLoss {
        mean: total / labels.len() as f64,
        grad_logits: Matrix::from_vec(logits.rows(), logits.cols(), grad)?,
    })
}
