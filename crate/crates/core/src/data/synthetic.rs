//! Synthetic ranging data with known measurement noise.
//!
//! Distances follow the two-condition noise model exactly:
//! `d̄ = d + n`, `n ~ N(0, σ_LOS²)` under LOS and `n ~ N(b, σ_NLOS²)` under NLOS.
//!
//! The CIR envelope is a stand-in for real propagation. Its leading edge sits
//! at `first_path_offset + samples_per_meter · (d̄ − d_min)` samples, so it
//! moves with the measured distance. LOS responses are one dominant sharp
//! pulse with weak echoes and a short diffuse tail; NLOS responses have an
//! attenuated first path, a stronger delayed path, stronger echoes and a
//! longer tail. Additive Gaussian noise (amplitude `1/snr` relative to the
//! strongest path) is applied before taking the magnitude.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::record::WaveformRecord;
use crate::error::{Error, Result};
use crate::sri::{Condition, NoiseModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub noise: NoiseModel,
    pub nlos_fraction: f64,
    /// `[d_min, d_max]` in meters.
    pub distance_range: (f64, f64),
    pub cir_length: usize,
    /// Gaussian pulse standard width, in samples.
    pub pulse_width: f64,
    /// Strongest-path amplitude over noise standard deviation.
    pub snr: f64,
    pub seed: u64,
    /// Leading-edge index at `d̄ = d_min`.
    pub first_path_offset: f64,
    /// Leading-edge shift per meter of measured distance.
    pub samples_per_meter: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            noise: NoiseModel {
                sigma_los: 0.1,
                sigma_nlos: 0.2,
                bias: 0.5,
            },
            nlos_fraction: 0.5,
            distance_range: (1.0, 20.0),
            cir_length: 152,
            pulse_width: 1.5,
            snr: 25.0,
            seed: 0,
            first_path_offset: 10.0,
            samples_per_meter: 0.1,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        let (d_min, d_max) = self.distance_range;
        if !(d_min > 0.0 && d_max >= d_min && d_max.is_finite()) {
            return Err(Error::Argument(format!(
                "distance range must satisfy 0 < d_min <= d_max, got [{d_min}, {d_max}]"
            )));
        }
        if !(0.0..=1.0).contains(&self.nlos_fraction) {
            return Err(Error::Argument(format!(
                "nlos fraction must be in [0, 1], got {}",
                self.nlos_fraction
            )));
        }
        if !(self.pulse_width > 0.0) || (self.cir_length as f64) <= self.pulse_width {
            return Err(Error::Argument(format!(
                "need 0 < pulse width < CIR length, got {} and {}",
                self.pulse_width, self.cir_length
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::Argument(format!("snr must be positive, got {}", self.snr)));
        }
        if !(self.first_path_offset >= 0.0 && self.samples_per_meter >= 0.0) {
            return Err(Error::Argument("leading-edge mapping must be non-negative".into()));
        }
        let last_edge = self.first_path_offset + self.samples_per_meter * (d_max - d_min);
        if last_edge + self.pulse_width >= self.cir_length as f64 {
            return Err(Error::Argument(format!(
                "leading edge can reach sample {last_edge:.1}, beyond a {}-sample CIR",
                self.cir_length
            )));
        }
        Ok(())
    }

    fn leading_edge(&self, measured: f64) -> f64 {
        (self.first_path_offset + self.samples_per_meter * (measured - self.distance_range.0)).max(0.0)
    }
}

struct Path {
    delay: f64,
    amplitude: f64,
}

/// Generates `n` records, deterministic in `config.seed`.
pub fn generate_synthetic(config: &SyntheticConfig, n: usize) -> Result<Vec<WaveformRecord>> {
    config.validate()?;
    if n == 0 {
        return Err(Error::Argument("number of records must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let los_noise = Normal::new(0.0, config.noise.sigma_los).map_err(|e| Error::Argument(e.to_string()))?;
    let nlos_noise =
        Normal::new(config.noise.bias, config.noise.sigma_nlos).map_err(|e| Error::Argument(e.to_string()))?;
    let (d_min, d_max) = config.distance_range;

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let truth = if d_max > d_min { rng.random_range(d_min..=d_max) } else { d_min };
        let condition = if rng.random::<f64>() < config.nlos_fraction {
            Condition::Nlos
        } else {
            Condition::Los
        };
        let noise = match condition {
            Condition::Los => los_noise.sample(&mut rng),
            Condition::Nlos => nlos_noise.sample(&mut rng),
        };
        let measured = truth + noise;
        let cir = synth_cir(config, condition, config.leading_edge(measured), &mut rng);
        out.push(WaveformRecord::new(cir, measured, truth, condition));
    }
    Ok(out)
}

fn synth_cir(config: &SyntheticConfig, condition: Condition, edge: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut paths = Vec::with_capacity(6);
    let (tail_amp, tail_decay) = match condition {
        Condition::Los => {
            paths.push(Path { delay: edge, amplitude: 1.0 });
            for _ in 0..2 {
                paths.push(Path {
                    delay: edge + rng.random_range(2.0..15.0),
                    amplitude: rng.random_range(0.1..0.3),
                });
            }
            (0.08, 10.0)
        }
        Condition::Nlos => {
            paths.push(Path {
                delay: edge,
                amplitude: rng.random_range(0.15..0.45),
            });
            paths.push(Path {
                delay: edge + rng.random_range(3.0..10.0),
                amplitude: 1.0,
            });
            for _ in 0..3 {
                paths.push(Path {
                    delay: edge + rng.random_range(4.0..30.0),
                    amplitude: rng.random_range(0.2..0.5),
                });
            }
            (0.25, 25.0)
        }
    };
    let width2 = 2.0 * config.pulse_width * config.pulse_width;
    let noise_std = 1.0 / config.snr;
    (0..config.cir_length)
        .map(|t| {
            let t = t as f64;
            let mut s: f64 = paths
                .iter()
                .map(|p| p.amplitude * (-(t - p.delay).powi(2) / width2).exp())
                .sum();
            if t > edge {
                let z: f64 = StandardNormal.sample(rng);
                s += tail_amp * (-(t - edge) / tail_decay).exp() * z.abs();
            }
            let n: f64 = StandardNormal.sample(rng);
            (s + noise_std * n).abs()
        })
        .collect()
}
