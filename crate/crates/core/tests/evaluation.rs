use std::f64::consts::PI;

use proptest::prelude::*;
use softrange::data::{canonicalize, generate_synthetic, Normalization, SyntheticConfig, WaveformRecord};
use softrange::eval::{cdf_points, evaluate, export_cdf, export_report, mean_absolute, root_mean_square, ReportFormat};
use softrange::pipeline::{
    train_estimator, train_identifier, ConditionClassifier, ConditionalRangeEstimator, TrainingConfig,
};
use softrange::sri::{Condition, GaussianComponent, PropagationPosterior};
use softrange::{Error, Result};

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * PI).sqrt())
}

/// `E|X|` for `X ~ N(mean, sd²)` by composite Simpson integration.
fn folded_mean(mean: f64, sd: f64) -> f64 {
    let (a, b) = (mean - 12.0 * sd, mean + 12.0 * sd);
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |x: f64| x.abs() * normal_pdf(x, mean, sd);
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Cheats by reading the label and truth planted in the first two CIR samples.
struct Oracle;

impl ConditionClassifier for Oracle {
    fn cir_length(&self) -> usize {
        4
    }
    fn posterior(&self, cir: &[f64], _: f64) -> Result<PropagationPosterior> {
        PropagationPosterior::from_nlos(cir[0])
    }
}

impl ConditionalRangeEstimator for Oracle {
    fn cir_length(&self) -> usize {
        4
    }
    fn component(&self, cir: &[f64], _: f64, _: Condition) -> Result<GaussianComponent> {
        GaussianComponent::new(cir[1], 1e-4)
    }
}

#[test]
fn perfect_models_give_exact_metrics() {
    let test: Vec<WaveformRecord> = (0..50)
        .map(|i| {
            let c = if i % 3 == 0 { Condition::Nlos } else { Condition::Los };
            let d = 1.0 + i as f64 * 0.25;
            WaveformRecord::new(vec![c.as_f64(), d, 0.0, 0.0], d + 0.5 * c.as_f64(), d, c)
        })
        .collect();
    let r = evaluate(&test, &Oracle, &Oracle).unwrap();
    assert_eq!(r.detection_accuracy, 1.0);
    assert_eq!(r.mae, 0.0);
    assert_eq!(r.rmse, 0.0);
    assert_eq!(r.n_samples, 50);
    assert!(r.inference_time_per_sample_ms.unwrap() >= 0.0);
    assert!(matches!(evaluate(&[], &Oracle, &Oracle), Err(Error::Argument(_))));
}

#[test]
fn unmitigated_mae_matches_folded_normal_oracle() {
    let cfg = SyntheticConfig { seed: 21, ..Default::default() };
    let data = generate_synthetic(&cfg, 20_000).unwrap();
    let raw: Vec<f64> = data.iter().map(WaveformRecord::ranging_error).collect();
    let n = &cfg.noise;
    let expected = 0.5 * folded_mean(0.0, n.sigma_los) + 0.5 * folded_mean(n.bias, n.sigma_nlos);
    // Closed form for the LOS half as a cross-check of the integrator.
    assert!((folded_mean(0.0, 0.1) - 0.1 * (2.0 / PI).sqrt()).abs() < 1e-9);
    let sd = (raw.iter().map(|e| e * e).sum::<f64>() / raw.len() as f64 - expected * expected).sqrt();
    let se = sd / (raw.len() as f64).sqrt();
    let got = mean_absolute(&raw);
    assert!((got - expected).abs() < 4.0 * se, "got {got}, expected {expected} ± {se}");
}

#[test]
fn empirical_cdf_matches_folded_normal() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let sigma = 0.3;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let dist: Normal<f64> = Normal::new(0.0, sigma).unwrap();
    let samples: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng).abs()).collect();
    let pts = cdf_points(&samples, usize::MAX).unwrap();
    // Folded-normal CDF by cumulative trapezoid on a fine grid.
    let step = 1e-5;
    let mut acc = 0.0;
    let mut x = 0.0;
    let mut ks: f64 = 0.0;
    let mut prev_frac = 0.0;
    for &(v, frac) in &pts {
        while x + step <= v {
            acc += step * (normal_pdf(x, 0.0, sigma) + normal_pdf(x + step, 0.0, sigma));
            x += step;
        }
        let f = acc + (v - x) * 2.0 * normal_pdf(x, 0.0, sigma);
        ks = ks.max((frac - f).abs()).max((prev_frac - f).abs());
        prev_frac = frac;
    }
    assert!(ks < 0.02, "Kolmogorov distance {ks}");
}

#[test]
fn cdf_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cdf.csv");
    export_cdf(&[0.1, 0.3, 0.2], &path, 100).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "residual_m,cumulative_fraction");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].ends_with(",1"));
    let bad = dir.path().join("missing/dir/cdf.csv");
    assert!(matches!(export_cdf(&[0.1], &bad, 10), Err(Error::Io { .. })));
}

fn small_set(seed: u64, n: usize) -> Vec<WaveformRecord> {
    let cfg = SyntheticConfig { seed, ..Default::default() };
    generate_synthetic(&cfg, n)
        .unwrap()
        .iter()
        .map(|r| canonicalize(r, 152, Normalization::MaxAbs))
        .collect()
}

#[test]
fn evaluation_leaves_parameters_untouched() {
    let train = small_set(30, 400);
    let test = small_set(31, 200);
    let cfg = TrainingConfig { epochs: 2, batch_size: 32, ..Default::default() };
    let id = train_identifier(&train, &cfg).unwrap().model;
    let est = train_estimator(&train, &cfg).unwrap().model;
    let before = (id.parameters().to_bytes().unwrap(), est.parameters().to_bytes().unwrap());
    let report = evaluate(&test, &id, &est).unwrap();
    let after = (id.parameters().to_bytes().unwrap(), est.parameters().to_bytes().unwrap());
    assert_eq!(before, after);
    assert!(report.rmse >= report.mae);

    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    let again = evaluate(&test, &id, &est).unwrap().without_timing();
    export_report(&report.without_timing(), &a, ReportFormat::Table).unwrap();
    export_report(&again, &b, ReportFormat::Table).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

proptest! {
    #[test]
    fn rmse_never_below_mae(values in prop::collection::vec(0.0f64..50.0, 1..200)) {
        let mae = mean_absolute(&values);
        let rmse = root_mean_square(&values);
        prop_assert!(rmse >= mae * (1.0 - 1e-12));
        prop_assert!(mae >= 0.0);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one(values in prop::collection::vec(0.0f64..5.0, 1..300), n in 1usize..50) {
        let pts = cdf_points(&values, n).unwrap();
        prop_assert!(pts.len() <= n);
        prop_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        prop_assert_eq!(pts.last().unwrap().1, 1.0);
    }
}
