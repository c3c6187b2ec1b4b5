//! Hyperparameters of the reference pretraining runs. Emitted as a record for
//! downstream training tooling; nothing here consumes it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub architecture: String,
    pub embed_size: u32,
    pub ffn_dimension: u32,
    pub num_layers: u32,
    pub attention_heads: u32,
    pub vocab_size: u32,
    pub max_seq_length: u32,
    pub batch_size: u32,
    pub warmup_steps: u32,
    pub epochs: u32,
    pub learning_rate: f64,
    pub total_parameters: u64,
    pub training_tokens: u64,
}

impl Default for TrainingManifest {
    fn default() -> Self {
        TrainingManifest {
            architecture: "OPT".into(),
            embed_size: 768,
            ffn_dimension: 3072,
            num_layers: 12,
            attention_heads: 12,
            vocab_size: 16384,
            max_seq_length: 256,
            batch_size: 32,
            warmup_steps: 32000,
            epochs: 20,
            learning_rate: 1e-4,
            total_parameters: 97_000_000,
            training_tokens: 100_000_000,
        }
    }
}

impl TrainingManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
