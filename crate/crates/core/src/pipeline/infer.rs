use super::model::{EstimatorModel, IdentifierModel};
use crate::error::{Error, Result};
use crate::sri::{Condition, GaussianComponent, PropagationPosterior, SoftRangeInfo};

/// Anything that maps `(cir, d̄)` to a condition posterior.
pub trait ConditionClassifier {
    fn cir_length(&self) -> usize;
    fn posterior(&self, cir: &[f64], measured: f64) -> Result<PropagationPosterior>;
}

/// Anything that maps `(cir, d̄, δ)` to a Gaussian over the true distance.
pub trait ConditionalRangeEstimator {
    fn cir_length(&self) -> usize;
    fn component(&self, cir: &[f64], measured: f64, condition: Condition) -> Result<GaussianComponent>;
}

impl ConditionClassifier for IdentifierModel {
    fn cir_length(&self) -> usize {
        IdentifierModel::cir_length(self)
    }

    fn posterior(&self, cir: &[f64], measured: f64) -> Result<PropagationPosterior> {
        IdentifierModel::posterior(self, cir, measured)
    }
}

impl ConditionalRangeEstimator for EstimatorModel {
    fn cir_length(&self) -> usize {
        EstimatorModel::cir_length(self)
    }

    fn component(&self, cir: &[f64], measured: f64, condition: Condition) -> Result<GaussianComponent> {
        EstimatorModel::component(self, cir, measured, condition)
    }
}

/// Soft range information for one measurement.
///
/// The identifier runs once; the estimator runs once per condition, so both
/// components are always produced regardless of the detected condition.
pub fn generate_sri<C, E>(cir: &[f64], measured: f64, identifier: &C, estimator: &E) -> Result<SoftRangeInfo>
where
    C: ConditionClassifier + ?Sized,
    E: ConditionalRangeEstimator + ?Sized,
{
    if identifier.cir_length() != estimator.cir_length() {
        return Err(Error::dim(
            "estimator CIR length",
            identifier.cir_length(),
            estimator.cir_length(),
        ));
    }
    if cir.len() != identifier.cir_length() {
        return Err(Error::dim("CIR length", identifier.cir_length(), cir.len()));
    }
    let posterior = identifier.posterior(cir, measured)?;
    let los = estimator.component(cir, measured, Condition::Los)?;
    let nlos = estimator.component(cir, measured, Condition::Nlos)?;
    Ok(SoftRangeInfo::new(posterior, los, nlos))
}
