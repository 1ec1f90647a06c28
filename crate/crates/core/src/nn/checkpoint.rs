//! Versioned checkpoint files.
//!
//! Layout: one header line `SOFTRANGE-CHECKPOINT <version>` followed by a JSON
//! body. Floats are written in shortest round-trip form and parsed with exact
//! round-trip, so save/load is value-exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::OptimizerState;
use super::network::Network;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "SOFTRANGE-CHECKPOINT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to resume or reproduce a model: layers, parameters,
/// optimizer state and the seed that initialized them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub network: Network,
    pub optimizer: OptimizerState,
    pub seed: u64,
    /// Free-form descriptors (model role, CIR length, ...).
    pub tags: BTreeMap<String, String>,
}

impl ModelParameters {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let body = serde_json::to_string(self)
            .map_err(|e| Error::Format { supported: CHECKPOINT_VERSION, detail: e.to_string() })?;
        Ok(format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n{body}\n").into_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let format_err = |detail: String| Error::Format { supported: CHECKPOINT_VERSION, detail };
        let text = std::str::from_utf8(bytes).map_err(|e| format_err(format!("not utf-8: {e}")))?;
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| format_err("missing header line".into()))?;
        let version = header
            .strip_prefix(CHECKPOINT_MAGIC)
            .map(str::trim)
            .ok_or_else(|| format_err(format!("bad magic in header {header:?}")))?;
        let version: u32 = version
            .parse()
            .map_err(|_| format_err(format!("unreadable version {version:?}")))?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Version { found: version, supported: CHECKPOINT_VERSION });
        }
        let params: ModelParameters =
            serde_json::from_str(body).map_err(|e| format_err(format!("corrupt body: {e}")))?;
        // Re-validate layer shapes rather than trusting the file.
        let network = Network::from_layers(params.network.layers().to_vec())?;
        if !params.network.params().iter().all(|p| p.is_finite()) {
            return Err(format_err("non-finite parameter".into()));
        }
        Ok(ModelParameters { network, ..params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
