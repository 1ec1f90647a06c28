//! Helpers shared by integration test targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softrange::data::{generate_synthetic, SyntheticConfig, WaveformRecord};
use softrange::nn::{LayerSpec, Mode, Network, Tensor};
use softrange::pipeline::{EstimatorModel, IdentifierModel, TrainingConfig};

pub const H: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-9 {
        return 0.0;
    }
    (analytic - numeric).abs() / scale
}

/// Scalar objective `Σ c ⊙ f(x)` with a fixed dropout seed.
fn objective(net: &mut Network, x: &Tensor, c: &[f64]) -> f64 {
    let y = net.forward(x, Mode::Train, Some(99)).unwrap();
    y.values().iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Worst relative error over every input and parameter coordinate of one layer.
pub fn layer_gradient_error(spec: &LayerSpec, draws: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + draw);
        let mut net = Network::new(std::slice::from_ref(spec), draw).unwrap();
        for p in net.params_mut() {
            for v in p.values_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        let batch = 3;
        let x = Tensor::matrix(
            batch,
            spec.in_dim(),
            (0..batch * spec.in_dim()).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let c: Vec<f64> = (0..batch * spec.out_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();

        net.forward(&x, Mode::Train, Some(99)).unwrap();
        let grads = net
            .backward(&Tensor::matrix(batch, spec.out_dim(), c.clone()).unwrap())
            .unwrap();

        for k in 0..x.len() {
            let mut xp = x.clone();
            xp.values_mut()[k] += H;
            let mut xm = x.clone();
            xm.values_mut()[k] -= H;
            let num = (objective(&mut net, &xp, &c) - objective(&mut net, &xm, &c)) / (2.0 * H);
            worst = worst.max(rel_err(grads.input.values()[k], num));
        }
        for (pi, g) in grads.params.iter().enumerate() {
            for k in 0..g.len() {
                let orig = net.params()[pi].values()[k];
                net.params_mut()[pi].values_mut()[k] = orig + H;
                let fp = objective(&mut net, &x, &c);
                net.params_mut()[pi].values_mut()[k] = orig - H;
                let fm = objective(&mut net, &x, &c);
                net.params_mut()[pi].values_mut()[k] = orig;
                worst = worst.max(rel_err(g.values()[k], (fp - fm) / (2.0 * H)));
            }
        }
    }
    worst
}

pub fn all_layer_kinds() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Linear { in_dim: 7, out_dim: 5 },
        LayerSpec::downsample(16),
        LayerSpec::downsample(9),
        LayerSpec::Relu { dim: 6 },
        LayerSpec::Dropout { dim: 6, rate: 0.3 },
        LayerSpec::ResidualBlock { dim: 5 },
        LayerSpec::Softmax { dim: 4 },
    ]
}

/// Zero biases put ReLUs exactly on their kink wherever a whole window was
/// zeroed upstream; small random biases move them off it.
fn jitter_biases(net: &mut Network, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in net.params_mut() {
        if p.shape().len() == 1 {
            for v in p.values_mut() {
                *v += rng.random_range(-0.1..0.1);
            }
        }
    }
}

fn sample_coordinates(sizes: &[usize], n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = rng.random_range(0..sizes.len());
            (t, rng.random_range(0..sizes[t]))
        })
        .collect()
}

fn gradcheck_batch() -> Vec<WaveformRecord> {
    let cfg = SyntheticConfig { cir_length: 40, first_path_offset: 5.0, ..Default::default() };
    generate_synthetic(&cfg, 8).unwrap()
}

fn small_config() -> TrainingConfig {
    TrainingConfig { hidden_width: 32, ..Default::default() }
}

/// Worst relative error of the identifier loss gradient over 20 random coordinates.
pub fn identifier_gradient_error() -> f64 {
    let data = gradcheck_batch();
    let batch: Vec<_> = data.iter().collect();
    let mut model = IdentifierModel::new(40, &small_config()).unwrap();
    jitter_biases(model.network_mut(), 3);
    let (_, grads) = model.loss_and_gradients(&batch, 5).unwrap();
    let sizes: Vec<usize> = grads.iter().map(Tensor::len).collect();
    let mut worst: f64 = 0.0;
    for (t, k) in sample_coordinates(&sizes, 20, 11) {
        let orig = model.network().params()[t].values()[k];
        model.network_mut().params_mut()[t].values_mut()[k] = orig + H;
        let fp = model.loss(&batch, 5).unwrap();
        model.network_mut().params_mut()[t].values_mut()[k] = orig - H;
        let fm = model.loss(&batch, 5).unwrap();
        model.network_mut().params_mut()[t].values_mut()[k] = orig;
        worst = worst.max(rel_err(grads[t].values()[k], (fp - fm) / (2.0 * H)));
    }
    worst
}

/// Worst relative error of the estimator loss gradient over 20 random coordinates.
pub fn estimator_gradient_error() -> f64 {
    let data = gradcheck_batch();
    let batch: Vec<_> = data.iter().collect();
    let cfg = small_config();
    let mut model = EstimatorModel::new(40, &cfg).unwrap();
    jitter_biases(model.network_mut(), 4);
    let (_, grads) = model.loss_and_gradients(&batch, cfg.eps0, 5).unwrap();
    let sizes: Vec<usize> = grads.iter().map(Tensor::len).collect();
    let mut worst: f64 = 0.0;
    for (t, k) in sample_coordinates(&sizes, 20, 12) {
        let orig = model.network().params()[t].values()[k];
        model.network_mut().params_mut()[t].values_mut()[k] = orig + H;
        let fp = model.loss(&batch, cfg.eps0, 5).unwrap();
        model.network_mut().params_mut()[t].values_mut()[k] = orig - H;
        let fm = model.loss(&batch, cfg.eps0, 5).unwrap();
        model.network_mut().params_mut()[t].values_mut()[k] = orig;
        worst = worst.max(rel_err(grads[t].values()[k], (fp - fm) / (2.0 * H)));
    }
    worst
}
