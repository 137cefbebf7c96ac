//! Central finite-difference check of the analytic logit gradients.
//!
//! The reference loss values are recomputed here from the closed forms,
//! without going through the production softmax, so the check does not
//! share a code path with what it verifies.

use serde::Serialize;

use super::{ClassIndex, LossKind, LossOutput};
use crate::error::{invalid, Result};
use crate::numeric::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckConfig {
    pub classes: usize,
    pub samples: usize,
    pub seed: u64,
    /// Central-difference step.
    pub step: f64,
    pub logit_range: f64,
    pub rel_tol: f64,
    /// Absolute tolerance used where the reference component is below `near_zero`.
    pub abs_tol: f64,
    pub near_zero: f64,
}

impl GradcheckConfig {
    pub fn new(classes: usize, samples: usize, seed: u64) -> Self {
        Self {
            classes,
            samples,
            seed,
            step: 1e-6,
            logit_range: 4.0,
            rel_tol: 1e-5,
            abs_tol: 1e-8,
            near_zero: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LossCheck {
    pub loss: LossKind,
    pub coordinates: usize,
    pub max_rel_err: f64,
    pub max_abs_err_near_zero: f64,
    pub failures: usize,
}

impl LossCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub classes: usize,
    pub samples: usize,
    pub checks: Vec<LossCheck>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(LossCheck::passed)
    }
}

/// Loss value from the closed form, `ln Σ_j exp(z_j - z_c)` for cross entropy.
pub fn reference_value(kind: LossKind, logits: &[f64], c: usize) -> f64 {
    let zc = logits[c];
    let ce = logits.iter().map(|z| (z - zc).exp()).sum::<f64>().ln();
    match kind {
        LossKind::CrossEntropy => ce,
        LossKind::Adaptive => (1.0 - (-ce).exp()) * ce,
    }
}

/// Central difference quotient `(L(z + h e_i) - L(z - h e_i)) / 2h` for
/// every logit.
///
/// Evaluating `L` twice and subtracting loses about `ε·|L|/h ≈ 1e-9` to
/// roundoff, which swamps small components once C is large. The same
/// quotient is formed here from the change in the partition sum
/// `R = Σ_{j≠c} exp(z_j - z_c)` via `ln_1p`/`exp_m1`, so the two function
/// values are never subtracted directly.
pub fn finite_difference_gradient(kind: LossKind, logits: &[f64], c: usize, step: f64) -> Vec<f64> {
    let zc = logits[c];
    let ratios: Vec<f64> = logits.iter().map(|z| (z - zc).exp()).collect();
    let rest: f64 = ratios.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, r)| r).sum();
    let base = rest.ln_1p();
    (0..logits.len())
        .map(|i| {
            // Exact change of ln(1 + R) for a ±step move of logit i.
            let delta = |sign: f64| {
                let change = if i == c {
                    rest * (-sign * step).exp_m1()
                } else {
                    ratios[i] * (sign * step).exp_m1()
                };
                (change / (1.0 + rest)).ln_1p()
            };
            let (up, down) = (delta(1.0), delta(-1.0));
            let diff = match kind {
                LossKind::CrossEntropy => up - down,
                // g(x) = x - x e^{-x} at x = base + up and x = base + down.
                LossKind::Adaptive => {
                    let (mu, md) = ((-up).exp_m1(), (-down).exp_m1());
                    (up - down)
                        - (-base).exp() * (base * (mu - md) + (up - down) + up * mu - down * md)
                }
            };
            diff / (2.0 * step)
        })
        .collect()
}

/// The textbook form: evaluate [`reference_value`] at both points and subtract.
pub fn naive_finite_difference_gradient(kind: LossKind, logits: &[f64], c: usize, step: f64) -> Vec<f64> {
    let mut z = logits.to_vec();
    (0..z.len())
        .map(|i| {
            let orig = z[i];
            z[i] = orig + step;
            let up = reference_value(kind, &z, c);
            z[i] = orig - step;
            let down = reference_value(kind, &z, c);
            z[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Checks the crate's own gradients.
pub fn run_gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    run_gradcheck_with(cfg, |kind, z, c| kind.evaluate(z, c))
}

/// Checks an arbitrary gradient implementation against finite differences.
pub fn run_gradcheck_with<F>(cfg: &GradcheckConfig, analytic: F) -> Result<GradcheckReport>
where
    F: Fn(LossKind, &[f64], ClassIndex) -> Result<LossOutput>,
{
    if cfg.classes < 2 {
        return Err(invalid(format!("gradcheck needs at least 2 classes, got {}", cfg.classes)));
    }
    if cfg.samples == 0 {
        return Err(invalid("gradcheck needs at least 1 sample"));
    }
    let checks = LossKind::ALL
        .into_iter()
        .map(|kind| {
            // Same logits for both losses.
            let mut rng = Rng::new(cfg.seed);
            let mut check = LossCheck {
                loss: kind,
                coordinates: 0,
                max_rel_err: 0.0,
                max_abs_err_near_zero: 0.0,
                failures: 0,
            };
            for _ in 0..cfg.samples {
                let z: Vec<f64> = (0..cfg.classes)
                    .map(|_| rng.uniform(-cfg.logit_range, cfg.logit_range))
                    .collect::<Result<_>>()?;
                let c = rng.below(cfg.classes);
                let got = analytic(kind, &z, ClassIndex(c))?;
                let fd = finite_difference_gradient(kind, &z, c, cfg.step);
                for (&a, &n) in got.grad_logits.iter().zip(&fd) {
                    check.coordinates += 1;
                    let abs = (a - n).abs();
                    if n.abs() < cfg.near_zero {
                        check.max_abs_err_near_zero = check.max_abs_err_near_zero.max(abs);
                        if abs.is_nan() || abs > cfg.abs_tol {
                            check.failures += 1;
                        }
                    } else {
                        let rel = abs / n.abs();
                        check.max_rel_err = check.max_rel_err.max(rel);
                        if rel.is_nan() || rel > cfg.rel_tol {
                            check.failures += 1;
                        }
                    }
                }
            }
            Ok(check)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradcheckReport {
        classes: cfg.classes,
        samples: cfg.samples,
        checks,
    })
}
