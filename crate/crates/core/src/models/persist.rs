//! Versioned JSON serialization for trained models.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ModelError, ModelFamily, ModelParams, TrainedModel};
use crate::data::PreprocessorState;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained model plus everything needed to reproduce and safely reuse it:
/// the sampled parameters, the training seed, and a hash binding it to the
/// preprocessor it was trained behind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub family: ModelFamily,
    pub params: ModelParams,
    pub train_seed: u64,
    pub preprocessing_hash: String,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| ModelError::InvalidParam(format!("model file: {e}")))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::InvalidParam(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }
}

/// Hash of the fitted preprocessor; models are only valid behind the exact
/// preprocessing they were trained with.
pub fn preprocessing_hash(state: &PreprocessorState) -> String {
    let bytes = serde_json::to_vec(state).expect("state serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
