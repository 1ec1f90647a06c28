use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sri::Condition;

/// Metadata key set by [`canonicalize`] when a CIR is all zeros.
pub const DEGENERATE_CIR_TAG: &str = "degenerate_cir";

/// One labeled measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformRecord {
    /// Absolute CIR amplitudes.
    pub cir: Vec<f64>,
    /// Measured distance d̄ in meters.
    pub measured_distance: f64,
    /// Ground-truth distance d in meters.
    pub true_distance: f64,
    pub condition: Condition,
    pub metadata: BTreeMap<String, String>,
}

impl WaveformRecord {
    pub fn new(cir: Vec<f64>, measured_distance: f64, true_distance: f64, condition: Condition) -> Self {
        Self {
            cir,
            measured_distance,
            true_distance,
            condition,
            metadata: BTreeMap::new(),
        }
    }

    /// Ranging error `d̄ − d`.
    pub fn ranging_error(&self) -> f64 {
        self.measured_distance - self.true_distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    None,
    /// Scale so that `max |cir| = 1`.
    #[default]
    MaxAbs,
}

/// Truncates or zero-pads the CIR tail to `len`, then normalizes.
///
/// An all-zero CIR is left as is and tagged with [`DEGENERATE_CIR_TAG`].
pub fn canonicalize(record: &WaveformRecord, len: usize, normalization: Normalization) -> WaveformRecord {
    let mut out = record.clone();
    out.cir.resize(len, 0.0);
    let peak = out.cir.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        out.metadata.insert(DEGENERATE_CIR_TAG.to_string(), "all-zero".to_string());
    } else if normalization == Normalization::MaxAbs {
        for v in &mut out.cir {
            *v /= peak;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(cir: Vec<f64>) -> WaveformRecord {
        WaveformRecord::new(cir, 4.0, 3.9, Condition::Los)
    }

    #[test]
    fn truncates_tail() {
        let cir: Vec<f64> = (0..157).map(|i| i as f64).collect();
        let out = canonicalize(&rec(cir), 152, Normalization::None);
        assert_eq!(out.cir.len(), 152);
        assert_eq!(out.cir[151], 151.0);
    }

    #[test]
    fn pads_tail_with_zeros() {
        let out = canonicalize(&rec(vec![1.0, 2.0]), 4, Normalization::None);
        assert_eq!(out.cir, vec![1.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn max_abs_scaling() {
        let out = canonicalize(&rec(vec![0.0, 2.0, -4.0]), 3, Normalization::MaxAbs);
        assert_eq!(out.cir, vec![0.0, 0.5, -1.0]);
        assert!(out.metadata.is_empty());
    }

    #[test]
    fn all_zero_flagged() {
        let out = canonicalize(&rec(vec![0.0; 5]), 5, Normalization::MaxAbs);
        assert_eq!(out.cir, vec![0.0; 5]);
        assert_eq!(out.metadata.get(DEGENERATE_CIR_TAG).map(String::as_str), Some("all-zero"));
    }
}
