//! Sequential training loops for the identifier and the estimator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainingConfig;
use super::model::{EstimatorModel, IdentifierModel};
use crate::data::{BatchSampler, WaveformRecord};
use crate::error::{Error, Result};
use crate::nn::{ModelParameters, Tensor};
use crate::sri::{estimator_loss_term, identifier_loss_term, mle_condition, Condition};

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Mean training-mode loss of each epoch.
    pub train_loss: Vec<f64>,
    /// Evaluation-mode loss on the held-out part, empty without one.
    pub validation_loss: Vec<f64>,
    /// Epoch (0-based) whose parameters were returned.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

impl TrainingHistory {
    pub fn epochs_run(&self) -> usize {
        self.train_loss.len()
    }
}

#[derive(Debug, Clone)]
pub struct IdentifierOutcome {
    pub model: IdentifierModel,
    pub history: TrainingHistory,
    /// MLE detection accuracy of the returned model on the whole training set.
    pub training_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct EstimatorOutcome {
    pub model: EstimatorModel,
    pub history: TrainingHistory,
}

trait Trainable {
    fn params(&mut self) -> &mut ModelParameters;
    fn batch_step(&mut self, batch: &[&WaveformRecord], dropout_seed: u64) -> Result<(f64, Vec<Tensor>)>;
    fn eval_loss(&self, records: &[WaveformRecord]) -> Result<f64>;
}

struct IdentifierTrainer(IdentifierModel);

impl Trainable for IdentifierTrainer {
    fn params(&mut self) -> &mut ModelParameters {
        self.0.parameters_mut()
    }

    fn batch_step(&mut self, batch: &[&WaveformRecord], dropout_seed: u64) -> Result<(f64, Vec<Tensor>)> {
        self.0.loss_and_gradients(batch, dropout_seed)
    }

    fn eval_loss(&self, records: &[WaveformRecord]) -> Result<f64> {
        let posteriors = self.0.posteriors(records)?;
        let total: f64 = posteriors
            .iter()
            .zip(records)
            .map(|(p, r)| identifier_loss_term(p, r.condition))
            .sum();
        Ok(total / records.len() as f64)
    }
}

struct EstimatorTrainer {
    model: EstimatorModel,
    eps0: f64,
}

impl Trainable for EstimatorTrainer {
    fn params(&mut self) -> &mut ModelParameters {
        self.model.parameters_mut()
    }

    fn batch_step(&mut self, batch: &[&WaveformRecord], dropout_seed: u64) -> Result<(f64, Vec<Tensor>)> {
        self.model.loss_and_gradients(batch, self.eps0, dropout_seed)
    }

    fn eval_loss(&self, records: &[WaveformRecord]) -> Result<f64> {
        let components = self.model.components(records)?;
        let total: f64 = components
            .iter()
            .zip(records)
            .map(|(c, r)| estimator_loss_term(c, r.true_distance, self.eps0))
            .sum();
        Ok(total / records.len() as f64)
    }
}

fn common_cir_length(train: &[WaveformRecord]) -> Result<usize> {
    let first = train
        .first()
        .ok_or_else(|| Error::Training("training set is empty".into()))?;
    let len = first.cir.len();
    if let Some((i, r)) = train.iter().enumerate().find(|(_, r)| r.cir.len() != len) {
        return Err(Error::dim(format!("CIR length of training record {i}"), len, r.cir.len()));
    }
    Ok(len)
}

/// Splits off the validation part with an unstratified seeded shuffle.
fn holdout(train: &[WaveformRecord], config: &TrainingConfig) -> (Vec<WaveformRecord>, Vec<WaveformRecord>) {
    let n_val = if config.early_stop_patience.is_some() {
        (config.validation_fraction * train.len() as f64).floor() as usize
    } else {
        0
    };
    if n_val == 0 || n_val >= train.len() {
        return (train.to_vec(), Vec::new());
    }
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0001));
    let (val_idx, fit_idx) = idx.split_at(n_val);
    let mut fit_idx = fit_idx.to_vec();
    let mut val_idx = val_idx.to_vec();
    fit_idx.sort_unstable();
    val_idx.sort_unstable();
    (
        fit_idx.iter().map(|&i| train[i].clone()).collect(),
        val_idx.iter().map(|&i| train[i].clone()).collect(),
    )
}

fn run<T: Trainable>(
    trainer: &mut T,
    fit: &[WaveformRecord],
    validation: &[WaveformRecord],
    config: &TrainingConfig,
) -> Result<TrainingHistory> {
    let mut history = TrainingHistory {
        train_loss: Vec::new(),
        validation_loss: Vec::new(),
        best_epoch: None,
        stopped_early: false,
    };
    if config.epochs == 0 {
        return Ok(history);
    }
    if config.batch_size > fit.len() {
        return Err(Error::Argument(format!(
            "batch size {} exceeds the {} records available for fitting",
            config.batch_size,
            fit.len()
        )));
    }
    let mut sampler = BatchSampler::new(fit.len(), config.batch_size, config.seed ^ 0x5eed_0002)?;
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0003);
    let mut best: Option<(f64, ModelParameters)> = None;
    let mut since_best = 0usize;

    for epoch in 0..config.epochs {
        let mut total = 0.0;
        for batch_idx in sampler.epoch() {
            let batch: Vec<&WaveformRecord> = batch_idx.iter().map(|&i| &fit[i]).collect();
            let (loss, grads) = trainer.batch_step(&batch, dropout_rng.random())?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("training loss became {loss} in epoch {epoch}")));
            }
            total += loss * batch.len() as f64;
            let params = trainer.params();
            let mut tensors = params.network.params_mut();
            params.optimizer.step(&mut tensors, &grads)?;
        }
        history.train_loss.push(total / fit.len() as f64);

        if validation.is_empty() {
            history.best_epoch = Some(epoch);
            continue;
        }
        let val = trainer.eval_loss(validation)?;
        history.validation_loss.push(val);
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, trainer.params().clone()));
            history.best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if config.early_stop_patience.is_some_and(|p| since_best >= p) {
                history.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, params)) = best {
        *trainer.params() = params;
    }
    Ok(history)
}

/// Trains the identifier on labelled records.
///
/// Both classes must be present in the fitting part; with a single class the
/// cross-entropy has a trivial minimizer.
pub fn train_identifier(train: &[WaveformRecord], config: &TrainingConfig) -> Result<IdentifierOutcome> {
    config.validate()?;
    let cir_length = common_cir_length(train)?;
    let (fit, validation) = holdout(train, config);
    for c in Condition::ALL {
        if !fit.iter().any(|r| r.condition == c) {
            return Err(Error::Training(format!(
                "identifier training needs both classes, no {c:?} records in the fitting set"
            )));
        }
    }
    let mut trainer = IdentifierTrainer(IdentifierModel::new(cir_length, config)?);
    let history = run(&mut trainer, &fit, &validation, config)?;
    let model = trainer.0;
    let posteriors = model.posteriors(train)?;
    let correct = posteriors
        .iter()
        .zip(train)
        .filter(|(p, r)| mle_condition(p) == r.condition)
        .count();
    Ok(IdentifierOutcome {
        model,
        history,
        training_accuracy: correct as f64 / train.len() as f64,
    })
}

/// Trains the estimator with ground-truth conditions as its δ input.
pub fn train_estimator(train: &[WaveformRecord], config: &TrainingConfig) -> Result<EstimatorOutcome> {
    config.validate()?;
    let cir_length = common_cir_length(train)?;
    let (fit, validation) = holdout(train, config);
    let mut trainer = EstimatorTrainer {
        model: EstimatorModel::new(cir_length, config)?,
        eps0: config.eps0,
    };
    let history = run(&mut trainer, &fit, &validation, config)?;
    Ok(EstimatorOutcome {
        model: trainer.model,
        history,
    })
}
