use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 0.0002;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam optimizer with bias correction.
///
/// Moments are allocated lazily on the first [`OptimizerState::step`] so the
/// same state can drive any parameter list, as long as shapes stay fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl Default for OptimizerState {
    fn default() -> Self {
        Self::new(DEFAULT_LEARNING_RATE, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPSILON)
            .expect("defaults are valid")
    }
}

impl OptimizerState {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Argument(format!("learning rate must be positive, got {learning_rate}")));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Argument(format!("{name} must be in (0, 1), got {b}")));
            }
        }
        if !(epsilon > 0.0) {
            return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn moments(&self) -> (&[Tensor], &[Tensor]) {
        (&self.first_moment, &self.second_moment)
    }

    /// Applies one Adam update in place.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::dim("adam gradient count", params.len(), grads.len()));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(Error::dim(
                    format!("adam gradient {i}"),
                    format!("{:?}", p.shape()),
                    format!("{:?}", g.shape()),
                ));
            }
        }
        if self.step_count == 0 {
            self.first_moment = params.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect();
            self.second_moment = self.first_moment.clone();
        } else if self.first_moment.len() != params.len()
            || self
                .first_moment
                .iter()
                .zip(params.iter())
                .any(|(m, p)| m.shape() != p.shape())
        {
            return Err(Error::dim(
                "adam moments",
                "shapes from the first step",
                "a different parameter layout",
            ));
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);

        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            let pv = p.values_mut();
            let mv = m.values_mut();
            let vv = v.values_mut();
            for (k, &gk) in g.values().iter().enumerate() {
                mv[k] = b1 * mv[k] + (1.0 - b1) * gk;
                vv[k] = b2 * vv[k] + (1.0 - b2) * gk * gk;
                let m_hat = mv[k] / c1;
                let v_hat = vv[k] / c2;
                pv[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults() {
        let s = OptimizerState::default();
        assert_eq!(s.learning_rate, 0.0002);
        assert_eq!(s.beta1, 0.9);
        assert_eq!(s.beta2, 0.999);
        assert_eq!(s.epsilon, 1e-8);
        assert_eq!(s.step_count(), 0);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = OptimizerState::default();
        let mut p = Tensor::vector(vec![1.0, -2.0, 3.0]);
        let before = p.clone();
        s.step(&mut [&mut p], &[Tensor::zeros(vec![3])]).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = g, v̂ = g², update = -α·g/(|g| + ε)
        for g in [0.37, -5.0, 1e-3] {
            let mut s = OptimizerState::new(0.01, 0.9, 0.999, 1e-8).unwrap();
            let mut p = Tensor::vector(vec![2.0]);
            s.step(&mut [&mut p], &[Tensor::vector(vec![g])]).unwrap();
            let expected = 2.0 - 0.01 * g / (g.abs() + 1e-8);
            assert!((p.values()[0] - expected).abs() < 1e-15);
            assert!((p.values()[0] - (2.0 - 0.01 * g.signum())).abs() < 1e-7);
        }
    }

    #[test]
    fn second_step_matches_recurrence() {
        let (lr, b1, b2, eps) = (0.1, 0.9, 0.999, 1e-8);
        let mut s = OptimizerState::new(lr, b1, b2, eps).unwrap();
        let mut p = Tensor::vector(vec![0.0]);
        s.step(&mut [&mut p], &[Tensor::vector(vec![1.0])]).unwrap();
        s.step(&mut [&mut p], &[Tensor::vector(vec![-2.0])]).unwrap();
        let m1: f64 = 0.1;
        let v1: f64 = 0.001;
        let step1 = lr * (m1 / 0.1) / ((v1 / 0.001).sqrt() + eps);
        let m2 = b1 * m1 + 0.1 * -2.0;
        let v2 = b2 * v1 + 0.001 * 4.0;
        let step2 = lr * (m2 / (1.0 - b1 * b1)) / ((v2 / (1.0 - b2 * b2)).sqrt() + eps);
        assert!((p.values()[0] - (-step1 - step2)).abs() < 1e-14);
        assert_eq!(s.step_count(), 2);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = OptimizerState::default();
        let mut p = Tensor::vector(vec![1.0, 2.0]);
        let err = s.step(&mut [&mut p], &[Tensor::vector(vec![1.0])]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        assert_eq!(s.step_count(), 0);
    }

    #[test]
    fn invalid_hyper_parameters() {
        assert!(OptimizerState::new(0.0, 0.9, 0.999, 1e-8).is_err());
        assert!(OptimizerState::new(0.1, 1.0, 0.999, 1e-8).is_err());
        assert!(OptimizerState::new(0.1, 0.9, 0.0, 1e-8).is_err());
    }
}
