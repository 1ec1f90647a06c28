use std::collections::BTreeMap;
use std::path::Path;

use crate::data::WaveformRecord;
use crate::error::{Error, Result};
use crate::nn::{LayerSpec, Mode, ModelParameters, Network, OptimizerState, Tensor};
use crate::sri::{
    estimator_loss_term, estimator_loss_term_grad, identifier_loss_term, identifier_loss_term_grad,
    Condition, GaussianComponent, PropagationPosterior,
};

use super::config::TrainingConfig;

const ROLE_TAG: &str = "role";
const CIR_LENGTH_TAG: &str = "cir_length";

/// Fusion layer followed by three (down-sample, ReLU, dropout) blocks.
fn trunk(input_dim: usize, width: usize, dropout: f64) -> Vec<LayerSpec> {
    let mut specs = vec![LayerSpec::Linear { in_dim: input_dim, out_dim: width }];
    let mut w = width;
    for _ in 0..3 {
        let down = LayerSpec::downsample(w);
        w = down.out_dim();
        specs.push(down);
        specs.push(LayerSpec::Relu { dim: w });
        specs.push(LayerSpec::Dropout { dim: w, rate: dropout });
    }
    specs
}

/// Identifier layers: input `[cir, d̄]`, output `[P(LOS), P(NLOS)]`.
pub fn identifier_architecture(cir_length: usize, width: usize, dropout: f64) -> Vec<LayerSpec> {
    let mut specs = trunk(cir_length + 1, width, dropout);
    let w = specs.last().map_or(width, LayerSpec::out_dim);
    specs.push(LayerSpec::Linear { in_dim: w, out_dim: 2 });
    specs.push(LayerSpec::Softmax { dim: 2 });
    specs
}

/// Estimator layers: input `[cir, d̄, δ]`, output `[μ − d̄, log σ²]`.
pub fn estimator_architecture(cir_length: usize, width: usize, dropout: f64) -> Vec<LayerSpec> {
    let mut specs = trunk(cir_length + 2, width, dropout);
    let w = specs.last().map_or(width, LayerSpec::out_dim);
    specs.push(LayerSpec::ResidualBlock { dim: w });
    specs.push(LayerSpec::Linear { in_dim: w, out_dim: 2 });
    specs
}

fn tags(role: &str, cir_length: usize) -> BTreeMap<String, String> {
    BTreeMap::from([
        (ROLE_TAG.to_string(), role.to_string()),
        (CIR_LENGTH_TAG.to_string(), cir_length.to_string()),
    ])
}

fn check_cir(expected: usize, cir: &[f64]) -> Result<()> {
    if cir.len() != expected {
        return Err(Error::dim("CIR length", expected, cir.len()));
    }
    Ok(())
}

fn restore_role(path: &Path, role: &str, input_extra: usize) -> Result<(ModelParameters, usize)> {
    let params = ModelParameters::load(path)?;
    let found = params.tags.get(ROLE_TAG).map(String::as_str).unwrap_or("");
    if found != role {
        return Err(Error::Format {
            supported: crate::nn::CHECKPOINT_VERSION,
            detail: format!("{} holds a {found:?} model, expected {role:?}", path.display()),
        });
    }
    let cir_length: usize = params
        .tags
        .get(CIR_LENGTH_TAG)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format {
            supported: crate::nn::CHECKPOINT_VERSION,
            detail: "missing cir_length tag".into(),
        })?;
    if params.network.in_dim() != cir_length + input_extra || params.network.out_dim() != 2 {
        return Err(Error::dim(
            format!("{role} checkpoint input"),
            cir_length + input_extra,
            params.network.in_dim(),
        ));
    }
    Ok((params, cir_length))
}

fn optimizer(config: &TrainingConfig) -> Result<OptimizerState> {
    OptimizerState::new(config.learning_rate, config.beta1, config.beta2, config.adam_epsilon)
}

/// Network estimating the LOS/NLOS posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifierModel {
    params: ModelParameters,
    cir_length: usize,
}

impl IdentifierModel {
    pub fn new(cir_length: usize, config: &TrainingConfig) -> Result<Self> {
        let specs = identifier_architecture(cir_length, config.hidden_width, config.dropout_rate);
        let network = Network::new(&specs, config.seed)?;
        Ok(Self {
            params: ModelParameters {
                network,
                optimizer: optimizer(config)?,
                seed: config.seed,
                tags: tags("identifier", cir_length),
            },
            cir_length,
        })
    }

    pub fn cir_length(&self) -> usize {
        self.cir_length
    }

    pub fn parameters(&self) -> &ModelParameters {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut ModelParameters {
        &mut self.params
    }

    pub fn network(&self) -> &Network {
        &self.params.network
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.params.network
    }

    pub fn input(&self, cir: &[f64], measured: f64) -> Result<Vec<f64>> {
        check_cir(self.cir_length, cir)?;
        let mut x = Vec::with_capacity(cir.len() + 1);
        x.extend_from_slice(cir);
        x.push(measured);
        Ok(x)
    }

    fn batch_input(&self, records: &[&WaveformRecord]) -> Result<Tensor> {
        let mut values = Vec::with_capacity(records.len() * (self.cir_length + 1));
        for r in records {
            values.extend(self.input(&r.cir, r.measured_distance)?);
        }
        Tensor::matrix(records.len(), self.cir_length + 1, values)
    }

    pub fn posterior(&self, cir: &[f64], measured: f64) -> Result<PropagationPosterior> {
        let y = self.params.network.infer(&Tensor::vector(self.input(cir, measured)?))?;
        PropagationPosterior::new(y.values()[0], y.values()[1])
    }

    /// Evaluation-mode posteriors for many records at once.
    pub fn posteriors(&self, records: &[WaveformRecord]) -> Result<Vec<PropagationPosterior>> {
        let mut out = Vec::with_capacity(records.len());
        for chunk in records.chunks(256) {
            let refs: Vec<&WaveformRecord> = chunk.iter().collect();
            let y = self.params.network.infer(&self.batch_input(&refs)?)?;
            for row in y.values().chunks(2) {
                out.push(PropagationPosterior::new(row[0], row[1])?);
            }
        }
        Ok(out)
    }

    /// Mean cross-entropy of a batch under a training-mode forward pass.
    pub fn loss(&mut self, batch: &[&WaveformRecord], dropout_seed: u64) -> Result<f64> {
        let x = self.batch_input(batch)?;
        let y = self.params.network.forward(&x, Mode::Train, Some(dropout_seed))?;
        let mut total = 0.0;
        for (row, r) in y.values().chunks(2).zip(batch) {
            total += identifier_loss_term(&PropagationPosterior::new(row[0], row[1])?, r.condition);
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean cross-entropy of a batch and its gradient w.r.t. every parameter.
    pub fn loss_and_gradients(&mut self, batch: &[&WaveformRecord], dropout_seed: u64) -> Result<(f64, Vec<Tensor>)> {
        let x = self.batch_input(batch)?;
        let y = self.params.network.forward(&x, Mode::Train, Some(dropout_seed))?;
        let n = batch.len() as f64;
        let mut total = 0.0;
        let mut upstream = Vec::with_capacity(batch.len() * 2);
        for (row, r) in y.values().chunks(2).zip(batch) {
            let p = PropagationPosterior::new(row[0], row[1])?;
            total += identifier_loss_term(&p, r.condition);
            let g = identifier_loss_term_grad(&p, r.condition);
            upstream.extend([g[0] / n, g[1] / n]);
        }
        let grads = self
            .params
            .network
            .backward(&Tensor::matrix(batch.len(), 2, upstream)?)?;
        Ok((total / n, grads.params))
    }

    pub fn checkpoint(&self, path: &Path) -> Result<()> {
        self.params.save(path)
    }

    pub fn restore(path: &Path) -> Result<Self> {
        let (params, cir_length) = restore_role(path, "identifier", 1)?;
        Ok(Self { params, cir_length })
    }
}

/// Network estimating the conditional Gaussian over true distance.
///
/// The first output is an offset from the measured distance, so
/// `μ = d̄ + out₀`; the second is `log σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorModel {
    params: ModelParameters,
    cir_length: usize,
}

impl EstimatorModel {
    /// Seeded initialization; the log-variance output starts at `log ε₀²`.
    pub fn new(cir_length: usize, config: &TrainingConfig) -> Result<Self> {
        let specs = estimator_architecture(cir_length, config.hidden_width, config.dropout_rate);
        let mut network = Network::new(&specs, config.seed.wrapping_add(1))?;
        if let Some(bias) = network.params_mut().last_mut() {
            bias.values_mut()[1] = 2.0 * config.eps0.ln();
        }
        Ok(Self {
            params: ModelParameters {
                network,
                optimizer: optimizer(config)?,
                seed: config.seed.wrapping_add(1),
                tags: tags("estimator", cir_length),
            },
            cir_length,
        })
    }

    pub fn cir_length(&self) -> usize {
        self.cir_length
    }

    pub fn parameters(&self) -> &ModelParameters {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut ModelParameters {
        &mut self.params
    }

    pub fn network(&self) -> &Network {
        &self.params.network
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.params.network
    }

    pub fn input(&self, cir: &[f64], measured: f64, condition: Condition) -> Result<Vec<f64>> {
        check_cir(self.cir_length, cir)?;
        let mut x = Vec::with_capacity(cir.len() + 2);
        x.extend_from_slice(cir);
        x.push(measured);
        x.push(condition.as_f64());
        Ok(x)
    }

    fn batch_input(&self, records: &[&WaveformRecord]) -> Result<Tensor> {
        let mut values = Vec::with_capacity(records.len() * (self.cir_length + 2));
        for r in records {
            values.extend(self.input(&r.cir, r.measured_distance, r.condition)?);
        }
        Tensor::matrix(records.len(), self.cir_length + 2, values)
    }

    fn to_component(measured: f64, out: &[f64]) -> Result<GaussianComponent> {
        let sigma2 = out[1].exp();
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Numeric(format!("estimator variance exp({})", out[1])));
        }
        GaussianComponent::new(measured + out[0], sigma2)
    }

    pub fn component(&self, cir: &[f64], measured: f64, condition: Condition) -> Result<GaussianComponent> {
        let y = self.params.network.infer(&Tensor::vector(self.input(cir, measured, condition)?))?;
        Self::to_component(measured, y.values())
    }

    /// Evaluation-mode components using each record's own label.
    pub fn components(&self, records: &[WaveformRecord]) -> Result<Vec<GaussianComponent>> {
        let mut out = Vec::with_capacity(records.len());
        for chunk in records.chunks(256) {
            let refs: Vec<&WaveformRecord> = chunk.iter().collect();
            let y = self.params.network.infer(&self.batch_input(&refs)?)?;
            for (row, r) in y.values().chunks(2).zip(chunk) {
                out.push(Self::to_component(r.measured_distance, row)?);
            }
        }
        Ok(out)
    }

    /// Mean Gaussian KL of a batch (ground-truth δ fed in) under a training-mode pass.
    pub fn loss(&mut self, batch: &[&WaveformRecord], eps0: f64, dropout_seed: u64) -> Result<f64> {
        let x = self.batch_input(batch)?;
        let y = self.params.network.forward(&x, Mode::Train, Some(dropout_seed))?;
        let mut total = 0.0;
        for (row, r) in y.values().chunks(2).zip(batch) {
            let c = Self::to_component(r.measured_distance, row)?;
            total += estimator_loss_term(&c, r.true_distance, eps0);
        }
        Ok(total / batch.len() as f64)
    }

    pub fn loss_and_gradients(
        &mut self,
        batch: &[&WaveformRecord],
        eps0: f64,
        dropout_seed: u64,
    ) -> Result<(f64, Vec<Tensor>)> {
        let x = self.batch_input(batch)?;
        let y = self.params.network.forward(&x, Mode::Train, Some(dropout_seed))?;
        let n = batch.len() as f64;
        let mut total = 0.0;
        let mut upstream = Vec::with_capacity(batch.len() * 2);
        for (row, r) in y.values().chunks(2).zip(batch) {
            let c = Self::to_component(r.measured_distance, row)?;
            total += estimator_loss_term(&c, r.true_distance, eps0);
            let (g_mu, g_s) = estimator_loss_term_grad(c.mu(), row[1], r.true_distance, eps0);
            upstream.extend([g_mu / n, g_s / n]);
        }
        let grads = self
            .params
            .network
            .backward(&Tensor::matrix(batch.len(), 2, upstream)?)?;
        Ok((total / n, grads.params))
    }

    pub fn checkpoint(&self, path: &Path) -> Result<()> {
        self.params.save(path)
    }

    pub fn restore(path: &Path) -> Result<Self> {
        let (params, cir_length) = restore_role(path, "estimator", 2)?;
        Ok(Self { params, cir_length })
    }
}
