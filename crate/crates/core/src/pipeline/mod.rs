//! Identifier and estimator networks, their training loops and SRI generation.

mod config;
mod infer;
mod manifest;
mod model;
mod train;

pub use config::TrainingConfig;
pub use infer::{generate_sri, ConditionClassifier, ConditionalRangeEstimator};
pub use manifest::{dataset_fingerprint, RunManifest, MANIFEST_VERSION};
pub use model::{estimator_architecture, identifier_architecture, EstimatorModel, IdentifierModel};
pub use train::{train_estimator, train_identifier, EstimatorOutcome, IdentifierOutcome, TrainingHistory};
