//! Soft range information (SRI) from raw UWB channel impulse responses.
//!
//! A two-network pipeline turns a CIR waveform and its measured distance into a
//! two-component Gaussian mixture over the true distance:
//!
//! - the *identifier* estimates the LOS/NLOS posterior,
//! - the *estimator* predicts a Gaussian over distance for each condition,
//! - the mixture of the two, weighted by the posterior, is the SRI.
//!
//! From the SRI the crate derives an NLOS decision (argmax of the posterior)
//! and a mitigated distance (mixture mean).
//!
//! Modules:
//! - [`nn`]: small feed-forward engine with manual backprop and Adam.
//! - [`sri`]: mixture objects, losses, estimators.
//! - [`data`]: records, CSV ingestion, splitting, batching, synthetic generator.
//! - [`pipeline`]: model assembly, training and SRI generation.
//! - [`eval`]: metrics, CDF and report export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod eval;
pub mod nn;
pub mod pipeline;
pub mod sri;

pub use error::{Error, Result};
