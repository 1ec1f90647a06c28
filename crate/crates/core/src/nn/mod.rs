//! Minimal feed-forward engine: layers, reverse-mode gradients, Adam.
//!
//! Networks are plain layer stacks over row-major `f64` batches. A training
//! forward pass records the activations (and dropout masks) that the matching
//! backward pass consumes.

mod adam;
mod checkpoint;
mod layer;
mod network;
mod tensor;

pub use adam::{OptimizerState, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE};
pub use checkpoint::{ModelParameters, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use layer::{Layer, LayerSpec, Mode};
pub use network::{Gradients, Network};
pub use tensor::Tensor;
