use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layer::{Cache, Layer, LayerSpec, Mode};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Gradients from one backward pass, in [`Network::params`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: Vec<Tensor>,
    pub input: Tensor,
}

#[derive(Debug, Clone)]
struct Tape {
    batch: usize,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    caches: Vec<Cache>,
}

/// A sequential stack of layers.
///
/// [`Network::forward`] records activations for a single subsequent
/// [`Network::backward`]; [`Network::infer`] is read-only and safe to share
/// across threads.
#[derive(Debug, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Layer>,
    #[serde(skip)]
    tape: Option<Tape>,
}

impl Clone for Network {
    /// Copies the layers only; a recorded forward pass is not carried over.
    fn clone(&self) -> Self {
        Self { layers: self.layers.clone(), tape: None }
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl Network {
    /// Builds a network with seeded Glorot-uniform initialization.
    pub fn new(specs: &[LayerSpec], seed: u64) -> Result<Self> {
        check_chain(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|s| Layer::init(s.clone(), &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers, tape: None })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec.clone()).collect();
        check_chain(&specs)?;
        for l in &layers {
            Layer::with_params(l.spec.clone(), l.params.clone())?;
        }
        Ok(Self { layers, tape: None })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec.clone()).collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].spec.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.out_dim()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params.iter()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params.iter_mut()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Forward pass that records activations for [`Network::backward`].
    ///
    /// `rng_seed` drives the dropout masks and is required in training mode
    /// when any dropout layer has a non-zero rate.
    pub fn forward(&mut self, input: &Tensor, mode: Mode, rng_seed: Option<u64>) -> Result<Tensor> {
        self.tape = None;
        let needs_rng = mode == Mode::Train
            && self
                .layers
                .iter()
                .any(|l| matches!(l.spec, LayerSpec::Dropout { rate, .. } if rate > 0.0));
        if needs_rng && rng_seed.is_none() {
            return Err(Error::Argument(
                "rng_seed is required for training-mode forward through dropout".into(),
            ));
        }
        let mut rng = rng_seed.map(ChaCha8Rng::seed_from_u64);
        let (batch, _) = self.check_input(input)?;
        let mut x = input.values().to_vec();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, cache) = layer.forward(&x, batch, mode, rng.as_mut());
            check_activation(&y, i, &layer.spec)?;
            caches.push(cache);
            x = y;
        }
        let output = self.shape_output(input, x)?;
        self.tape = Some(Tape {
            batch,
            input_shape: input.shape().to_vec(),
            output_shape: output.shape().to_vec(),
            caches,
        });
        Ok(output)
    }

    /// Deterministic evaluation-mode forward pass; dropout is the identity.
    pub fn infer(&self, input: &Tensor) -> Result<Tensor> {
        let (batch, _) = self.check_input(input)?;
        let mut x = input.values().to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, _) = layer.forward::<ChaCha8Rng>(&x, batch, Mode::Eval, None);
            check_activation(&y, i, &layer.spec)?;
            x = y;
        }
        self.shape_output(input, x)
    }

    /// Backpropagates `upstream` (d loss / d output) through the recorded forward pass.
    ///
    /// The recording is consumed; a second call without a new forward fails.
    pub fn backward(&mut self, upstream: &Tensor) -> Result<Gradients> {
        let tape = self
            .tape
            .take()
            .ok_or_else(|| Error::State("backward called without a recorded forward pass".into()))?;
        if upstream.shape() != tape.output_shape.as_slice() {
            return Err(Error::dim(
                "upstream gradient",
                format!("{:?}", tape.output_shape),
                format!("{:?}", upstream.shape()),
            ));
        }
        let mut g = upstream.values().to_vec();
        let mut per_layer = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&tape.caches).rev() {
            let (pg, dx) = layer.backward(cache, &g, tape.batch);
            per_layer.push(pg);
            g = dx;
        }
        per_layer.reverse();
        Ok(Gradients {
            params: per_layer.into_iter().flatten().collect(),
            input: Tensor::new(tape.input_shape, g)?,
        })
    }

    pub fn has_recorded_forward(&self) -> bool {
        self.tape.is_some()
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize)> {
        let (batch, cols) = input.as_rows()?;
        let first = &self.layers[0].spec;
        if cols != first.in_dim() {
            return Err(Error::dim(format!("layer 0 ({})", first.name()), first.in_dim(), cols));
        }
        Ok((batch, cols))
    }

    fn shape_output(&self, input: &Tensor, values: Vec<f64>) -> Result<Tensor> {
        let out = self.out_dim();
        if input.shape().len() == 1 {
            Ok(Tensor::vector(values))
        } else {
            Tensor::matrix(values.len() / out, out, values)
        }
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Argument("network needs at least one layer".into()));
    }
    for (i, s) in specs.iter().enumerate() {
        s.validate()?;
        if i > 0 && specs[i - 1].out_dim() != s.in_dim() {
            return Err(Error::dim(
                format!("layer {i} ({})", s.name()),
                specs[i - 1].out_dim(),
                s.in_dim(),
            ));
        }
    }
    Ok(())
}

fn check_activation(y: &[f64], index: usize, spec: &LayerSpec) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("output of layer {index} ({})", spec.name())))
    }
}
