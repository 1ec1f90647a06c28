//! Soft range information: the LOS/NLOS posterior, per-condition Gaussians,
//! their mixture, the two training losses and the point estimators derived
//! from a mixture.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default standard deviation (meters) of the target Gaussian in [`estimator_loss`].
pub const DEFAULT_EPS0: f64 = 0.05;

/// Probabilities are clamped into `[PROB_CLAMP, 1 - PROB_CLAMP]` before any log.
pub const PROB_CLAMP: f64 = 1e-7;

const POSTERIOR_TOLERANCE: f64 = 1e-6;

/// Propagation condition δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    Los = 0,
    Nlos = 1,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Los, Condition::Nlos];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Scalar encoding fed to the estimator network.
    pub fn as_f64(self) -> f64 {
        self as usize as f64
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Condition::Los),
            1 => Ok(Condition::Nlos),
            other => Err(Error::Argument(format!("condition label must be 0 or 1, got {other}"))),
        }
    }
}

/// Estimated `P(δ=0 | r)`, `P(δ=1 | r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationPosterior {
    p_los: f64,
    p_nlos: f64,
}

impl PropagationPosterior {
    pub fn new(p_los: f64, p_nlos: f64) -> Result<Self> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if !in_unit(p_los) || !in_unit(p_nlos) {
            return Err(Error::Argument(format!(
                "posterior probabilities must lie in [0, 1], got ({p_los}, {p_nlos})"
            )));
        }
        if (p_los + p_nlos - 1.0).abs() > POSTERIOR_TOLERANCE {
            return Err(Error::Argument(format!(
                "posterior must sum to 1, got {p_los} + {p_nlos}"
            )));
        }
        Ok(Self { p_los, p_nlos })
    }

    pub fn from_nlos(p_nlos: f64) -> Result<Self> {
        Self::new(1.0 - p_nlos, p_nlos)
    }

    pub fn p_los(&self) -> f64 {
        self.p_los
    }

    pub fn p_nlos(&self) -> f64 {
        self.p_nlos
    }

    pub fn prob(&self, c: Condition) -> f64 {
        match c {
            Condition::Los => self.p_los,
            Condition::Nlos => self.p_nlos,
        }
    }
}

/// One conditional SRI branch `N(d; mu, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    mu: f64,
    sigma2: f64,
}

impl GaussianComponent {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Numeric(format!("gaussian mean {mu}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Argument(format!("variance must be positive and finite, got {sigma2}")));
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn pdf(&self, d: f64) -> f64 {
        let z = d - self.mu;
        (-0.5 * z * z / self.sigma2).exp() / (2.0 * PI * self.sigma2).sqrt()
    }
}

/// Two-component Gaussian mixture over distance, weighted by the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftRangeInfo {
    pub posterior: PropagationPosterior,
    pub los: GaussianComponent,
    pub nlos: GaussianComponent,
}

impl SoftRangeInfo {
    pub fn new(posterior: PropagationPosterior, los: GaussianComponent, nlos: GaussianComponent) -> Self {
        Self { posterior, los, nlos }
    }

    pub fn component(&self, c: Condition) -> &GaussianComponent {
        match c {
            Condition::Los => &self.los,
            Condition::Nlos => &self.nlos,
        }
    }

    /// Mixture density at distance `d`.
    pub fn density(&self, d: f64) -> f64 {
        sri_density(self, d)
    }

    pub fn mmse_distance(&self) -> f64 {
        mmse_distance(self)
    }

    pub fn mle_condition(&self) -> Condition {
        mle_condition(&self.posterior)
    }
}

/// Measurement-noise parameters: `n ~ N(0, σ_LOS²)` under LOS and
/// `n ~ N(b, σ_NLOS²)` under NLOS.
///
/// Zero standard deviations are accepted and describe the noiseless limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_los: f64,
    pub sigma_nlos: f64,
    pub bias: f64,
}

impl NoiseModel {
    pub fn new(sigma_los: f64, sigma_nlos: f64, bias: f64) -> Result<Self> {
        let model = Self { sigma_los, sigma_nlos, bias };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_los", self.sigma_los),
            ("sigma_nlos", self.sigma_nlos),
            ("bias", self.bias),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self, c: Condition) -> f64 {
        match c {
            Condition::Los => self.sigma_los,
            Condition::Nlos => self.sigma_nlos,
        }
    }

    pub fn mean(&self, c: Condition) -> f64 {
        match c {
            Condition::Los => 0.0,
            Condition::Nlos => self.bias,
        }
    }
}

pub fn sri_density(sri: &SoftRangeInfo, d: f64) -> f64 {
    sri.posterior.p_los * sri.los.pdf(d) + sri.posterior.p_nlos * sri.nlos.pdf(d)
}

/// Mixture mean `p_los·μ₀ + p_nlos·μ₁`.
pub fn mmse_distance(sri: &SoftRangeInfo) -> f64 {
    sri.posterior.p_los * sri.los.mu + sri.posterior.p_nlos * sri.nlos.mu
}

/// Argmax of the posterior; a tie goes to NLOS.
pub fn mle_condition(posterior: &PropagationPosterior) -> Condition {
    if posterior.p_los > posterior.p_nlos {
        Condition::Los
    } else {
        Condition::Nlos
    }
}

/// Bias-subtraction distance estimate `d̄ − P(δ=1|r)·b` for a known bias.
pub fn mitigated_de(measured: f64, posterior: &PropagationPosterior, bias: f64) -> f64 {
    measured - posterior.p_nlos * bias
}

/// `|estimated − true_distance|`.
pub fn residual_error(estimated: f64, true_distance: f64) -> f64 {
    (estimated - true_distance).abs()
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Cross-entropy of one sample: `−log P̂(δ = label)` after clamping.
pub fn identifier_loss_term(p: &PropagationPosterior, label: Condition) -> f64 {
    -clamp_prob(p.prob(label)).ln()
}

/// Gradient of [`identifier_loss_term`] w.r.t. `(p_los, p_nlos)`.
///
/// Zero on the clamped side, matching the clamped forward value.
pub fn identifier_loss_term_grad(p: &PropagationPosterior, label: Condition) -> [f64; 2] {
    let q = p.prob(label);
    let mut g = [0.0; 2];
    if q > PROB_CLAMP && q < 1.0 - PROB_CLAMP {
        g[label.index()] = -1.0 / q;
    }
    g
}

/// Summed cross-entropy over a batch.
pub fn identifier_loss(predicted: &[PropagationPosterior], labels: &[Condition]) -> Result<f64> {
    check_batch(predicted.len(), labels.len())?;
    Ok(predicted
        .iter()
        .zip(labels)
        .map(|(p, l)| identifier_loss_term(p, *l))
        .sum())
}

/// `KL(N(μ, σ²) ‖ N(d, ε₀²))` for one sample.
pub fn estimator_loss_term(c: &GaussianComponent, truth: f64, eps0: f64) -> f64 {
    let e2 = eps0 * eps0;
    let dm = c.mu - truth;
    (c.sigma2 + dm * dm) / (2.0 * e2) + eps0.ln() - 0.5 * c.sigma2.ln() - 0.5
}

/// Gradient of [`estimator_loss_term`] w.r.t. `(μ, s)` where `σ² = exp(s)`.
pub fn estimator_loss_term_grad(mu: f64, log_sigma2: f64, truth: f64, eps0: f64) -> (f64, f64) {
    let e2 = eps0 * eps0;
    ((mu - truth) / e2, log_sigma2.exp() / (2.0 * e2) - 0.5)
}

/// Summed Gaussian KL over a batch.
pub fn estimator_loss(predicted: &[GaussianComponent], truths: &[f64], eps0: f64) -> Result<f64> {
    check_batch(predicted.len(), truths.len())?;
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::Argument(format!("eps0 must be positive, got {eps0}")));
    }
    Ok(predicted
        .iter()
        .zip(truths)
        .map(|(c, d)| estimator_loss_term(c, *d, eps0))
        .sum())
}

fn check_batch(a: usize, b: usize) -> Result<()> {
    if a == 0 {
        return Err(Error::Argument("empty batch".into()));
    }
    if a != b {
        return Err(Error::Argument(format!("batch length mismatch: {a} predictions, {b} targets")));
    }
    Ok(())
}
