use proptest::prelude::*;
use softrange::data::{canonicalize, generate_synthetic, split, Normalization, SyntheticConfig};
use softrange::sri::{Condition, NoiseModel};

/// Nearest class centroid on the normalized CIR; centroids from the training part.
fn centroid_accuracy(cfg: &SyntheticConfig, n: usize) -> f64 {
    let recs: Vec<_> = generate_synthetic(cfg, n)
        .unwrap()
        .iter()
        .map(|r| canonicalize(r, cfg.cir_length, Normalization::MaxAbs))
        .collect();
    let s = split(&recs, 0.8, 0).unwrap();
    let mut c = [vec![0.0; cfg.cir_length], vec![0.0; cfg.cir_length]];
    let mut k = [0.0; 2];
    for r in &s.train {
        k[r.condition.index()] += 1.0;
        for (a, v) in c[r.condition.index()].iter_mut().zip(&r.cir) {
            *a += v;
        }
    }
    for (ci, ki) in c.iter_mut().zip(k) {
        ci.iter_mut().for_each(|v| *v /= ki);
    }
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    let hits = s
        .test
        .iter()
        .filter(|r| {
            let guess = if dist(&r.cir, &c[1]) < dist(&r.cir, &c[0]) { Condition::Nlos } else { Condition::Los };
            guess == r.condition
        })
        .count();
    hits as f64 / s.test.len() as f64
}

#[test]
fn classes_are_centroid_separable_at_snr_20() {
    for seed in [1, 2] {
        let cfg = SyntheticConfig { snr: 20.0, seed, ..Default::default() };
        let acc = centroid_accuracy(&cfg, 5000);
        assert!(acc >= 0.99, "seed {seed}: nearest-centroid accuracy {acc}");
    }
}

#[test]
fn los_spread_within_one_percent() {
    let cfg = SyntheticConfig {
        nlos_fraction: 0.0,
        cir_length: 40,
        first_path_offset: 5.0,
        samples_per_meter: 0.5,
        seed: 4,
        ..Default::default()
    };
    let errs: Vec<f64> = generate_synthetic(&cfg, 100_000)
        .unwrap()
        .iter()
        .map(|r| r.measured_distance - r.true_distance)
        .collect();
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd - 0.1).abs() <= 0.001, "sd {sd}");
}

#[test]
fn nlos_mean_within_three_standard_errors() {
    let cfg = SyntheticConfig {
        nlos_fraction: 1.0,
        cir_length: 60,
        first_path_offset: 5.0,
        samples_per_meter: 0.5,
        seed: 5,
        ..Default::default()
    };
    let errs: Vec<f64> = generate_synthetic(&cfg, 100_000)
        .unwrap()
        .iter()
        .map(|r| r.measured_distance - r.true_distance)
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!((mean - 0.5).abs() <= 3.0 * 0.2 / (1e5f64).sqrt(), "mean {mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn records_respect_config(
        seed in 0u64..10_000,
        frac in 0.0f64..=1.0,
        d_min in 0.5f64..5.0,
        span in 0.0f64..10.0,
        sigma_los in 0.0f64..0.5,
        sigma_nlos in 0.0f64..0.5,
        bias in 0.0f64..1.0,
    ) {
        let cfg = SyntheticConfig {
            noise: NoiseModel::new(sigma_los, sigma_nlos, bias).unwrap(),
            nlos_fraction: frac,
            distance_range: (d_min, d_min + span),
            seed,
            ..Default::default()
        };
        for r in generate_synthetic(&cfg, 20).unwrap() {
            prop_assert_eq!(r.cir.len(), cfg.cir_length);
            prop_assert!(r.true_distance >= d_min && r.true_distance <= d_min + span);
            prop_assert!(r.cir.iter().all(|v| *v >= 0.0 && v.is_finite()));
            prop_assert!(r.measured_distance.is_finite());
        }
    }
}
