//! SGD and Adagrad update rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Sgd,
            learning_rate,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn adagrad(learning_rate: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adagrad,
            learning_rate,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Learning rate must be positive unless `allow_zero_rate`; the
    /// pre-trained feature extractor uses a zero rate as a degenerate check.
    pub fn validate(&self, allow_zero_rate: bool) -> Result<()> {
        let lr_ok = if allow_zero_rate {
            self.learning_rate >= 0.0
        } else {
            self.learning_rate > 0.0
        };
        if !lr_ok || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn check(params: &[f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::dim(
            None,
            format!("{} parameters but {} gradients", params.len(), grads.len()),
        ));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite gradient at index {i}")));
    }
    Ok(())
}

/// `θ ← θ − η·g`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], config: &OptimizerConfig) -> Result<()> {
    check(params, grads)?;
    let lr = config.learning_rate;
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

/// `G ← G + g²`, `θ ← θ − η·g / (√G + ε)`.
pub fn adagrad_step(
    params: &mut [f64],
    grads: &[f64],
    accumulators: &mut [f64],
    config: &OptimizerConfig,
) -> Result<()> {
    check(params, grads)?;
    if accumulators.len() != params.len() {
        return Err(Error::dim(
            None,
            format!(
                "{} accumulators for {} parameters",
                accumulators.len(),
                params.len()
            ),
        ));
    }
    let (lr, eps) = (config.learning_rate, config.epsilon);
    for ((p, &g), acc) in params.iter_mut().zip(grads).zip(accumulators.iter_mut()) {
        *acc += g * g;
        *p -= lr * g / (acc.sqrt() + eps);
    }
    Ok(())
}

/// Optimizer bound to a fixed list of parameter buffers.
///
/// Adagrad keeps one squared-gradient accumulator per parameter, all zero at
/// construction; SGD keeps none.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    accumulators: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, buffer_sizes: &[usize]) -> Self {
        let accumulators = match config.kind {
            OptimizerKind::Sgd => Vec::new(),
            OptimizerKind::Adagrad => buffer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        };
        Optimizer {
            config,
            accumulators,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.accumulators
    }

    /// Applies one update to every buffer. `params[i]` pairs with `grads[i]`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::dim(
                None,
                format!("{} parameter buffers but {} gradient buffers", params.len(), grads.len()),
            ));
        }
        match self.config.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    sgd_step(p, g, &self.config)?;
                }
            }
            OptimizerKind::Adagrad => {
                if self.accumulators.len() != params.len() {
                    return Err(Error::dim(
                        None,
                        format!(
                            "optimizer tracks {} buffers, got {}",
                            self.accumulators.len(),
                            params.len()
                        ),
                    ));
                }
                for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.accumulators) {
                    adagrad_step(p, g, acc, &self.config)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_single_value() {
        let mut p = [1.0];
        sgd_step(&mut p, &[0.5], &OptimizerConfig::sgd(0.01)).unwrap();
        assert_eq!(p[0], 0.995);
        sgd_step(&mut p, &[0.0], &OptimizerConfig::sgd(0.01)).unwrap();
        assert_eq!(p[0], 0.995);
    }

    #[test]
    fn adagrad_first_step() {
        let cfg = OptimizerConfig::adagrad(0.1);
        let mut p = [0.0];
        let mut acc = [0.0];
        adagrad_step(&mut p, &[2.0], &mut acc, &cfg).unwrap();
        assert_eq!(acc[0], 4.0);
        assert_eq!(p[0], -0.1 * 2.0 / (2.0 + 1e-8));
        assert!((p[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn adagrad_zero_gradient_is_noop() {
        let cfg = OptimizerConfig::adagrad(0.1);
        let mut p = [0.7, -0.2];
        let mut acc = [1.0, 0.0];
        adagrad_step(&mut p, &[0.0, 0.0], &mut acc, &cfg).unwrap();
        assert_eq!(p, [0.7, -0.2]);
        assert_eq!(acc, [1.0, 0.0]);
    }

    #[test]
    fn errors() {
        let cfg = OptimizerConfig::sgd(0.1);
        assert!(matches!(
            sgd_step(&mut [0.0; 2], &[0.0; 3], &cfg),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            sgd_step(&mut [0.0], &[f64::NAN], &cfg),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            adagrad_step(&mut [0.0; 2], &[0.0; 2], &mut [0.0], &cfg),
            Err(Error::Dimension { .. })
        ));
        assert!(OptimizerConfig::sgd(0.0).validate(false).is_err());
        assert!(OptimizerConfig::sgd(0.0).validate(true).is_ok());
    }
}
