use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE};
use crate::sri::DEFAULT_EPS0;

/// Hyper-parameters shared by both training loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Upper bound on epochs; early stopping may end sooner.
    pub epochs: usize,
    pub batch_size: usize,
    /// Target standard deviation (meters) in the estimator loss.
    pub eps0: f64,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement; `None` disables it.
    pub early_stop_patience: Option<usize>,
    /// Share of the training set held out for early stopping.
    pub validation_fraction: f64,
    pub dropout_rate: f64,
    /// Output width of the fusion layer; each down-sampling block halves it.
    pub hidden_width: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: DEFAULT_LEARNING_RATE,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            adam_epsilon: DEFAULT_EPSILON,
            epochs: 200,
            batch_size: 64,
            eps0: DEFAULT_EPS0,
            seed: 0,
            early_stop_patience: Some(10),
            validation_fraction: 0.1,
            dropout_rate: 0.2,
            hidden_width: 128,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("adam_epsilon", self.adam_epsilon)?;
        positive("eps0", self.eps0)?;
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Argument(format!("{name} must be in (0, 1), got {b}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::Argument("batch_size must be positive".into()));
        }
        if self.early_stop_patience == Some(0) {
            return Err(Error::Argument("early_stop_patience must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::Argument(format!(
                "validation_fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Argument(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate)));
        }
        if self.hidden_width < 8 {
            return Err(Error::Argument("hidden_width must be at least 8".into()));
        }
        Ok(())
    }
}
