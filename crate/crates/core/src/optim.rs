//! SGD with momentum and coupled weight decay, and the step-decay schedule.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{MlpModel, ParamGrads, ParamKind, ParamMut};
use crate::numeric::check_finite;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdConfig {
    pub lr0: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Epochs between learning-rate drops.
    pub step_size: usize,
    pub gamma: f64,
    /// Apply weight decay to bias vectors as well as weight matrices.
    pub decay_biases: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            lr0: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
            step_size: 50,
            gamma: 0.1,
            decay_biases: true,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(invalid(format!("lr0 must be positive, got {}", self.lr0)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(invalid(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        if self.step_size == 0 {
            return Err(invalid("step_size must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        Ok(())
    }
}

/// `lr0 · gamma^⌊epoch / step_size⌋`, epochs counted from 0.
///
/// When `1 / gamma` is an integer (0.1, 0.5, …) the rate is computed as
/// `lr0 / (1/gamma)^k`, which is correctly rounded for decimal schedules:
/// `0.1 · 0.1` is `0.010000000000000002` but `0.1 / 10` is `0.01`.
pub fn step_lr(cfg: &SgdConfig, epoch: i64) -> Result<f64> {
    if epoch < 0 {
        return Err(invalid(format!("epoch must be non-negative, got {epoch}")));
    }
    if cfg.step_size == 0 {
        return Err(invalid("step_size must be positive"));
    }
    let drops = (epoch as u64 / cfg.step_size as u64) as i32;
    let inverse = (1.0 / cfg.gamma).round();
    if (inverse * cfg.gamma - 1.0).abs() < 1e-12 {
        Ok(cfg.lr0 / inverse.powi(drops))
    } else {
        Ok(cfg.lr0 * cfg.gamma.powi(drops))
    }
}

/// One zero-initialized velocity buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdState {
    velocities: Vec<Vec<f64>>,
}

impl SgdState {
    pub fn new(shapes: &[usize]) -> Self {
        Self {
            velocities: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_model(model: &MlpModel) -> Self {
        Self::new(&model.param_shapes())
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }
}

/// In-place update of every tensor:
///
/// ```text
/// g ← grad + weight_decay · param
/// v ← momentum · v + g
/// param ← param − lr · v
/// ```
///
/// No dampening, no Nesterov.
pub fn sgd_step(
    params: &mut [ParamMut<'_>],
    grads: &[&[f64]],
    state: &mut SgdState,
    cfg: &SgdConfig,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.velocities.len() {
        return Err(invalid(format!(
            "tensor count mismatch: {} params, {} grads, {} velocities",
            params.len(),
            grads.len(),
            state.velocities.len()
        )));
    }
    for (i, ((p, g), v)) in params.iter().zip(grads).zip(&state.velocities).enumerate() {
        if p.values.len() != g.len() || p.values.len() != v.len() {
            return Err(Error::ShapeMismatch {
                left: (i, p.values.len()),
                right: (g.len(), v.len()),
                context: "param / grad / velocity lengths",
            });
        }
    }
    for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut state.velocities) {
        let wd = match p.kind {
            ParamKind::Bias if !cfg.decay_biases => 0.0,
            _ => cfg.weight_decay,
        };
        for ((x, &gi), vi) in p.values.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
            let step = gi + wd * *x;
            *vi = cfg.momentum * *vi + step;
            *x -= lr * *vi;
        }
        check_finite(p.values)?;
    }
    Ok(())
}

/// Optimizer bound to one model's parameter layout.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub config: SgdConfig,
    state: SgdState,
}

impl Sgd {
    pub fn new(config: SgdConfig, model: &MlpModel) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: SgdState::for_model(model),
        })
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &ParamGrads, lr: f64) -> Result<()> {
        sgd_step(&mut model.params_mut(), &grads.tensors(), &mut self.state, &self.config, lr)
    }

    pub fn state(&self) -> &SgdState {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(momentum: f64, weight_decay: f64) -> SgdConfig {
        SgdConfig {
            momentum,
            weight_decay,
            ..SgdConfig::default()
        }
    }

    fn step_once(x: &mut [f64], g: &[f64], state: &mut SgdState, cfg: &SgdConfig, lr: f64) {
        let mut params = [ParamMut {
            kind: ParamKind::Weight,
            values: x,
        }];
        sgd_step(&mut params, &[g], state, cfg, lr).unwrap();
    }

    #[test]
    fn schedule_examples() {
        let cfg = SgdConfig::default();
        assert_eq!(step_lr(&cfg, 0).unwrap(), 0.1);
        assert_eq!(step_lr(&cfg, 49).unwrap(), 0.1);
        assert_eq!(step_lr(&cfg, 50).unwrap(), 0.01);
        assert_eq!(step_lr(&cfg, 150).unwrap(), 0.0001);
        let half = SgdConfig { gamma: 0.5, lr0: 1.0, step_size: 1, ..cfg };
        assert_eq!(step_lr(&half, 3).unwrap(), 0.125);
        let odd = SgdConfig { gamma: 0.3, lr0: 1.0, step_size: 1, ..cfg };
        assert!((step_lr(&odd, 2).unwrap() - 0.09).abs() < 1e-16);
        assert!(step_lr(&cfg, -1).is_err());
    }

    #[test]
    fn schedule_has_one_drop_per_band() {
        let cfg = SgdConfig::default();
        let lrs: Vec<f64> = (0..200).map(|e| step_lr(&cfg, e).unwrap()).collect();
        let drops = lrs.windows(2).filter(|w| w[1] != w[0]).count();
        assert_eq!(drops, 200 / cfg.step_size - 1);
    }

    #[test]
    fn vanilla_sgd() {
        let cfg = plain(0.0, 0.0);
        let mut x = vec![1.0, -2.0];
        let mut state = SgdState::new(&[2]);
        step_once(&mut x, &[0.5, 0.25], &mut state, &cfg, 0.1);
        assert_eq!(x, vec![1.0 - 0.1 * 0.5, -2.0 - 0.1 * 0.25]);
    }

    #[test]
    fn momentum_unrolled_two_steps() {
        let cfg = plain(0.9, 0.0);
        let (lr, g) = (0.1, 0.3);
        let mut x = vec![0.0];
        let mut state = SgdState::new(&[1]);
        step_once(&mut x, &[g], &mut state, &cfg, lr);
        step_once(&mut x, &[g], &mut state, &cfg, lr);
        // v1 = g, v2 = 0.9 g + g
        assert!((x[0] + lr * (g + 1.9 * g)).abs() < 1e-15);
    }

    #[test]
    fn decay_only_first_step() {
        let cfg = plain(0.9, 5e-4);
        let mut x = vec![2.0];
        let mut state = SgdState::new(&[1]);
        step_once(&mut x, &[0.0], &mut state, &cfg, 0.1);
        assert!((x[0] - (2.0 - 0.1 * 5e-4 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn bias_decay_is_configurable() {
        let cfg = SgdConfig {
            decay_biases: false,
            ..plain(0.0, 0.5)
        };
        let mut w = vec![1.0];
        let mut b = vec![1.0];
        let mut state = SgdState::new(&[1, 1]);
        let mut params = [
            ParamMut {
                kind: ParamKind::Weight,
                values: &mut w,
            },
            ParamMut {
                kind: ParamKind::Bias,
                values: &mut b,
            },
        ];
        sgd_step(&mut params, &[&[0.0], &[0.0]], &mut state, &cfg, 0.1).unwrap();
        assert_eq!((w[0], b[0]), (0.95, 1.0));
    }

    #[test]
    fn shape_mismatch_is_error() {
        let cfg = SgdConfig::default();
        let mut x = vec![1.0, 2.0];
        let mut state = SgdState::new(&[2]);
        let mut params = [ParamMut {
            kind: ParamKind::Weight,
            values: &mut x,
        }];
        assert!(sgd_step(&mut params, &[&[1.0]], &mut state, &cfg, 0.1).is_err());
        assert!(sgd_step(&mut params, &[], &mut state, &cfg, 0.1).is_err());
        assert!(sgd_step(&mut params, &[&[1.0, 1.0]], &mut SgdState::new(&[3]), &cfg, 0.1).is_err());
    }

    #[test]
    fn converges_on_quadratic() {
        let cfg = SgdConfig::default();
        let mut x = vec![3.0, -4.0, 1.5];
        let mut state = SgdState::new(&[3]);
        let mut norms = Vec::new();
        for _ in 0..300 {
            let g = x.clone();
            step_once(&mut x, &g, &mut state, &cfg, 0.01);
            norms.push(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        // With momentum 0.9 the iteration matrix has complex eigenvalues of
        // modulus sqrt(0.9), so the norm decays with a slow oscillation
        // (period ≈ 71 steps) rather than monotonically. Peaks shrink.
        let peaks: Vec<f64> = norms.chunks(71).map(|c| c.iter().copied().fold(0.0, f64::max)).collect();
        assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
        assert!(*norms.last().unwrap() < 1e-3);
    }

    #[test]
    fn quadratic_without_momentum_is_monotone() {
        let cfg = plain(0.0, 5e-4);
        let mut x = vec![3.0, -4.0, 1.5];
        let mut state = SgdState::new(&[3]);
        let mut prev = f64::INFINITY;
        for _ in 0..300 {
            let g = x.clone();
            step_once(&mut x, &g, &mut state, &cfg, 0.01);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < prev);
            prev = norm;
        }
    }

    #[test]
    fn validates_config() {
        assert!(SgdConfig::default().validate().is_ok());
        assert!(SgdConfig { momentum: 1.0, ..Default::default() }.validate().is_err());
        assert!(SgdConfig { gamma: 1.0, ..Default::default() }.validate().is_err());
        assert!(SgdConfig { step_size: 0, ..Default::default() }.validate().is_err());
        assert!(SgdConfig { lr0: 0.0, ..Default::default() }.validate().is_err());
        assert!(SgdConfig { weight_decay: -1.0, ..Default::default() }.validate().is_err());
    }
}
