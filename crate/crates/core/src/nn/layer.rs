//! Layer kinds and their forward/backward kernels.
//!
//! Every kernel works on a row-major batch `(batch, dim)`. Parameters live in
//! [`Layer::params`] in a fixed per-kind order so gradients and optimizer
//! moments line up by index.

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Shape and hyper-parameters of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayerSpec {
    Linear {
        in_dim: usize,
        out_dim: usize,
    },
    /// Single-channel strided 1-D convolution with zero padding.
    Conv1dDownsample {
        in_dim: usize,
        out_dim: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Relu {
        dim: usize,
    },
    Dropout {
        dim: usize,
        rate: f64,
    },
    /// `relu(x + W2·relu(W1·x + b1) + b2)`.
    ResidualBlock {
        dim: usize,
    },
    /// Row-wise softmax.
    Softmax {
        dim: usize,
    },
}

impl LayerSpec {
    /// Down-sampling convolution (kernel 4, stride 2, padding 1) halving `in_dim`.
    pub fn downsample(in_dim: usize) -> Self {
        let (kernel, stride, padding) = (4, 2, 1);
        LayerSpec::Conv1dDownsample {
            in_dim,
            out_dim: conv_out_len(in_dim, kernel, stride, padding),
            kernel,
            stride,
            padding,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Linear { .. } => "linear",
            LayerSpec::Conv1dDownsample { .. } => "conv1d-downsample",
            LayerSpec::Relu { .. } => "relu",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::ResidualBlock { .. } => "residual-block",
            LayerSpec::Softmax { .. } => "softmax",
        }
    }

    pub fn in_dim(&self) -> usize {
        match *self {
            LayerSpec::Linear { in_dim, .. } | LayerSpec::Conv1dDownsample { in_dim, .. } => in_dim,
            LayerSpec::Relu { dim }
            | LayerSpec::Dropout { dim, .. }
            | LayerSpec::ResidualBlock { dim }
            | LayerSpec::Softmax { dim } => dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match *self {
            LayerSpec::Linear { out_dim, .. } | LayerSpec::Conv1dDownsample { out_dim, .. } => {
                out_dim
            }
            LayerSpec::Relu { dim }
            | LayerSpec::Dropout { dim, .. }
            | LayerSpec::ResidualBlock { dim }
            | LayerSpec::Softmax { dim } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim() == 0 || self.out_dim() == 0 {
            return Err(Error::Argument(format!("{}: dims must be positive", self.name())));
        }
        match *self {
            LayerSpec::Conv1dDownsample {
                in_dim,
                out_dim,
                kernel,
                stride,
                padding,
            } => {
                if stride == 0 || kernel == 0 {
                    return Err(Error::Argument(
                        "conv1d-downsample: stride and kernel must be >= 1".into(),
                    ));
                }
                if in_dim + 2 * padding < kernel {
                    return Err(Error::Argument(
                        "conv1d-downsample: kernel wider than padded input".into(),
                    ));
                }
                let expected = conv_out_len(in_dim, kernel, stride, padding);
                if expected != out_dim {
                    return Err(Error::dim("conv1d-downsample out_dim", expected, out_dim));
                }
            }
            LayerSpec::Dropout { rate, .. } if !(0.0..1.0).contains(&rate) => {
                return Err(Error::Argument(format!(
                    "dropout rate must be in [0, 1), got {rate}"
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// Parameter tensor shapes, in storage order.
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        match *self {
            LayerSpec::Linear { in_dim, out_dim } => vec![vec![out_dim, in_dim], vec![out_dim]],
            LayerSpec::Conv1dDownsample { kernel, .. } => vec![vec![kernel], vec![1]],
            LayerSpec::ResidualBlock { dim } => {
                vec![vec![dim, dim], vec![dim], vec![dim, dim], vec![dim]]
            }
            _ => Vec::new(),
        }
    }
}

fn conv_out_len(in_dim: usize, kernel: usize, stride: usize, padding: usize) -> usize {
    (in_dim + 2 * padding).saturating_sub(kernel) / stride + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A layer spec together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub spec: LayerSpec,
    pub params: Vec<Tensor>,
}

/// Values recorded during a training-mode forward pass.
#[derive(Debug, Clone)]
pub(crate) enum Cache {
    Input(Vec<f64>),
    Mask(Option<Vec<f64>>),
    Residual {
        input: Vec<f64>,
        hidden_pre: Vec<f64>,
        hidden: Vec<f64>,
        sum_pre: Vec<f64>,
    },
    Output(Vec<f64>),
}

impl Layer {
    /// Glorot-uniform weights, zero biases.
    ///
    /// Down-sampling kernels take the absolute value of the Glorot draw. A
    /// single-channel kernel with mostly negative taps maps the non-negative
    /// output of a preceding ReLU to zero everywhere and never recovers.
    pub fn init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let params = match spec {
            LayerSpec::Linear { in_dim, out_dim } => {
                vec![glorot(rng, &[out_dim, in_dim], in_dim, out_dim), Tensor::zeros(vec![out_dim])]
            }
            LayerSpec::Conv1dDownsample { kernel, .. } => {
                let mut w = glorot(rng, &[kernel], kernel, kernel);
                w.values_mut().iter_mut().for_each(|v| *v = v.abs());
                vec![w, Tensor::zeros(vec![1])]
            }
            LayerSpec::ResidualBlock { dim } => vec![
                glorot(rng, &[dim, dim], dim, dim),
                Tensor::zeros(vec![dim]),
                glorot(rng, &[dim, dim], dim, dim),
                Tensor::zeros(vec![dim]),
            ],
            _ => Vec::new(),
        };
        Ok(Self { spec, params })
    }

    /// Builds a layer from explicit parameters, checking their shapes.
    pub fn with_params(spec: LayerSpec, params: Vec<Tensor>) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.param_shapes();
        if shapes.len() != params.len() {
            return Err(Error::dim(
                format!("{} parameter count", spec.name()),
                shapes.len(),
                params.len(),
            ));
        }
        for (shape, p) in shapes.iter().zip(&params) {
            if p.shape() != shape.as_slice() {
                return Err(Error::dim(
                    format!("{} parameter", spec.name()),
                    format!("{shape:?}"),
                    format!("{:?}", p.shape()),
                ));
            }
        }
        Ok(Self { spec, params })
    }

    pub(crate) fn forward<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        batch: usize,
        mode: Mode,
        rng: Option<&mut R>,
    ) -> (Vec<f64>, Cache) {
        match self.spec {
            LayerSpec::Linear { in_dim, out_dim } => {
                let y = affine(x, batch, in_dim, out_dim, self.params[0].values(), self.params[1].values());
                (y, Cache::Input(x.to_vec()))
            }
            LayerSpec::Conv1dDownsample {
                in_dim,
                out_dim,
                kernel,
                stride,
                padding,
            } => {
                let w = self.params[0].values();
                let bias = self.params[1].values()[0];
                let mut y = vec![bias; batch * out_dim];
                for b in 0..batch {
                    let xr = &x[b * in_dim..(b + 1) * in_dim];
                    let yr = &mut y[b * out_dim..(b + 1) * out_dim];
                    for (o, yo) in yr.iter_mut().enumerate() {
                        for (j, wj) in w.iter().enumerate().take(kernel) {
                            if let Some(i) = conv_src(o, j, stride, padding, in_dim) {
                                *yo += wj * xr[i];
                            }
                        }
                    }
                }
                (y, Cache::Input(x.to_vec()))
            }
            LayerSpec::Relu { .. } => {
                let y = x.iter().map(|v| v.max(0.0)).collect();
                (y, Cache::Input(x.to_vec()))
            }
            LayerSpec::Dropout { rate, .. } => {
                if mode == Mode::Eval || rate == 0.0 {
                    return (x.to_vec(), Cache::Mask(None));
                }
                let rng = rng.expect("dropout rng checked by Network::forward");
                let keep = 1.0 / (1.0 - rate);
                let mask: Vec<f64> = (0..x.len())
                    .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
                    .collect();
                let y = x.iter().zip(&mask).map(|(v, m)| v * m).collect();
                (y, Cache::Mask(Some(mask)))
            }
            LayerSpec::ResidualBlock { dim } => {
                let p = &self.params;
                let hidden_pre = affine(x, batch, dim, dim, p[0].values(), p[1].values());
                let hidden: Vec<f64> = hidden_pre.iter().map(|v| v.max(0.0)).collect();
                let mut sum_pre = affine(&hidden, batch, dim, dim, p[2].values(), p[3].values());
                for (s, xi) in sum_pre.iter_mut().zip(x) {
                    *s += xi;
                }
                let y = sum_pre.iter().map(|v| v.max(0.0)).collect();
                (
                    y,
                    Cache::Residual {
                        input: x.to_vec(),
                        hidden_pre,
                        hidden,
                        sum_pre,
                    },
                )
            }
            LayerSpec::Softmax { dim } => {
                let mut y = vec![0.0; x.len()];
                for b in 0..batch {
                    softmax_row(&x[b * dim..(b + 1) * dim], &mut y[b * dim..(b + 1) * dim]);
                }
                (y.clone(), Cache::Output(y))
            }
        }
    }

    /// Returns `(parameter gradients, input gradient)`.
    pub(crate) fn backward(&self, cache: &Cache, g: &[f64], batch: usize) -> (Vec<Tensor>, Vec<f64>) {
        match (&self.spec, cache) {
            (&LayerSpec::Linear { in_dim, out_dim }, Cache::Input(x)) => {
                let (dw, db, dx) = affine_backward(x, g, batch, in_dim, out_dim, self.params[0].values());
                (
                    vec![
                        Tensor::new(vec![out_dim, in_dim], dw).expect("shape"),
                        Tensor::vector(db),
                    ],
                    dx,
                )
            }
            (
                &LayerSpec::Conv1dDownsample {
                    in_dim,
                    out_dim,
                    kernel,
                    stride,
                    padding,
                },
                Cache::Input(x),
            ) => {
                let w = self.params[0].values();
                let mut dw = vec![0.0; kernel];
                let mut db = 0.0;
                let mut dx = vec![0.0; batch * in_dim];
                for b in 0..batch {
                    let xr = &x[b * in_dim..(b + 1) * in_dim];
                    let gr = &g[b * out_dim..(b + 1) * out_dim];
                    let dxr = &mut dx[b * in_dim..(b + 1) * in_dim];
                    for (o, go) in gr.iter().enumerate() {
                        db += go;
                        for j in 0..kernel {
                            if let Some(i) = conv_src(o, j, stride, padding, in_dim) {
                                dw[j] += go * xr[i];
                                dxr[i] += go * w[j];
                            }
                        }
                    }
                }
                (vec![Tensor::vector(dw), Tensor::vector(vec![db])], dx)
            }
            (LayerSpec::Relu { .. }, Cache::Input(x)) => {
                let dx = x.iter().zip(g).map(|(xi, gi)| if *xi > 0.0 { *gi } else { 0.0 }).collect();
                (Vec::new(), dx)
            }
            (LayerSpec::Dropout { .. }, Cache::Mask(mask)) => {
                let dx = match mask {
                    Some(m) => g.iter().zip(m).map(|(gi, mi)| gi * mi).collect(),
                    None => g.to_vec(),
                };
                (Vec::new(), dx)
            }
            (
                &LayerSpec::ResidualBlock { dim },
                Cache::Residual {
                    input,
                    hidden_pre,
                    hidden,
                    sum_pre,
                },
            ) => {
                let p = &self.params;
                let g_sum: Vec<f64> = sum_pre
                    .iter()
                    .zip(g)
                    .map(|(s, gi)| if *s > 0.0 { *gi } else { 0.0 })
                    .collect();
                let (dw2, db2, g_hidden) = affine_backward(hidden, &g_sum, batch, dim, dim, p[2].values());
                let g_hidden_pre: Vec<f64> = hidden_pre
                    .iter()
                    .zip(&g_hidden)
                    .map(|(h, gi)| if *h > 0.0 { *gi } else { 0.0 })
                    .collect();
                let (dw1, db1, mut dx) = affine_backward(input, &g_hidden_pre, batch, dim, dim, p[0].values());
                for (d, gs) in dx.iter_mut().zip(&g_sum) {
                    *d += gs;
                }
                (
                    vec![
                        Tensor::new(vec![dim, dim], dw1).expect("shape"),
                        Tensor::vector(db1),
                        Tensor::new(vec![dim, dim], dw2).expect("shape"),
                        Tensor::vector(db2),
                    ],
                    dx,
                )
            }
            (&LayerSpec::Softmax { dim }, Cache::Output(y)) => {
                let mut dx = vec![0.0; y.len()];
                for b in 0..batch {
                    let yr = &y[b * dim..(b + 1) * dim];
                    let gr = &g[b * dim..(b + 1) * dim];
                    let dot: f64 = yr.iter().zip(gr).map(|(a, c)| a * c).sum();
                    for k in 0..dim {
                        dx[b * dim + k] = yr[k] * (gr[k] - dot);
                    }
                }
                (Vec::new(), dx)
            }
            (spec, _) => unreachable!("cache does not belong to a {} layer", spec.name()),
        }
    }
}

fn glorot<R: Rng + ?Sized>(rng: &mut R, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    let n = shape.iter().product();
    let values = (0..n).map(|_| dist.sample(rng)).collect();
    Tensor::new(shape.to_vec(), values).expect("shape")
}

#[inline]
fn conv_src(o: usize, j: usize, stride: usize, padding: usize, in_dim: usize) -> Option<usize> {
    let pos = (o * stride + j).checked_sub(padding)?;
    (pos < in_dim).then_some(pos)
}

/// `y = x·Wᵀ + b` for row-major `W` of shape `(out, in)`.
fn affine(x: &[f64], batch: usize, in_dim: usize, out_dim: usize, w: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; batch * out_dim];
    for b in 0..batch {
        let xr = &x[b * in_dim..(b + 1) * in_dim];
        for o in 0..out_dim {
            let wr = &w[o * in_dim..(o + 1) * in_dim];
            y[b * out_dim + o] = bias[o] + dot(wr, xr);
        }
    }
    y
}

fn affine_backward(
    x: &[f64],
    g: &[f64],
    batch: usize,
    in_dim: usize,
    out_dim: usize,
    w: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dw = vec![0.0; out_dim * in_dim];
    let mut db = vec![0.0; out_dim];
    let mut dx = vec![0.0; batch * in_dim];
    for b in 0..batch {
        let xr = &x[b * in_dim..(b + 1) * in_dim];
        let dxr = &mut dx[b * in_dim..(b + 1) * in_dim];
        for o in 0..out_dim {
            let go = g[b * out_dim + o];
            if go == 0.0 {
                continue;
            }
            db[o] += go;
            let dwr = &mut dw[o * in_dim..(o + 1) * in_dim];
            let wr = &w[o * in_dim..(o + 1) * in_dim];
            for i in 0..in_dim {
                dwr[i] += go * xr[i];
                dxr[i] += go * wr[i];
            }
        }
    }
    (dw, db, dx)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax_row(x: &[f64], out: &mut [f64]) {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, v) in out.iter_mut().zip(x) {
        *o = (v - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}
