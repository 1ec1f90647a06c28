use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::TrainingConfig;
use super::train::TrainingHistory;
use crate::data::WaveformRecord;
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config: TrainingConfig,
    pub dataset_fingerprint: String,
    pub n_train: usize,
    pub n_test: usize,
    pub cir_length: usize,
    pub identifier_history: TrainingHistory,
    pub estimator_history: TrainingHistory,
    pub identifier_training_accuracy: f64,
    /// Free-form extras such as the data source or split seed.
    pub extra: BTreeMap<String, String>,
    /// Filled in after evaluation.
    pub metrics: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Schema(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            supported: MANIFEST_VERSION,
            detail: format!("{}: {e}", path.display()),
        })?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Version { found: m.version, supported: MANIFEST_VERSION });
        }
        Ok(m)
    }
}

/// SHA-256 over the exact bit patterns of every record field, as hex.
pub fn dataset_fingerprint(records: &[WaveformRecord]) -> String {
    let mut h = Sha256::new();
    h.update((records.len() as u64).to_le_bytes());
    for r in records {
        h.update((r.cir.len() as u64).to_le_bytes());
        for v in &r.cir {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(r.measured_distance.to_bits().to_le_bytes());
        h.update(r.true_distance.to_bits().to_le_bytes());
        h.update([r.condition.index() as u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sri::Condition;

    #[test]
    fn fingerprint_sensitive_to_every_field() {
        let base = vec![WaveformRecord::new(vec![0.5, 1.0], 3.0, 2.9, Condition::Los)];
        let f = dataset_fingerprint(&base);
        assert_eq!(f.len(), 64);
        assert_eq!(f, dataset_fingerprint(&base.clone()));
        let mut a = base.clone();
        a[0].cir[1] = 0.999;
        let mut b = base.clone();
        b[0].true_distance = 3.0;
        let mut c = base.clone();
        c[0].condition = Condition::Nlos;
        for other in [a, b, c] {
            assert_ne!(f, dataset_fingerprint(&other));
        }
    }
}
