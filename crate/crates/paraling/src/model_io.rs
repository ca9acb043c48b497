//! Self-describing JSON model files.

use std::path::Path;

use paraling_core::Model;
use serde::{Deserialize, Serialize};

pub const MODEL_FORMAT: &str = "paraling-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("not a model file (format `{0}`)")]
    Format(String),
    #[error("model file version {0} is not supported")]
    Version(u32),
    #[error("model expects {model} features but the store has {store}")]
    ColumnCount { model: usize, store: usize },
    #[error("feature column {index} is `{store}` in the store but `{model}` in the model")]
    ColumnName { index: usize, model: String, store: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    /// Which rows trained it, e.g. `all`.
    pub trained_on: String,
    pub seed: u64,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, feature_names: Vec<String>, trained_on: String, seed: u64) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            feature_names,
            trained_on,
            seed,
            model,
        }
    }

    /// Checks the store's feature columns against the ones the model saw.
    pub fn check_columns(&self, store_names: &[String]) -> Result<(), ModelFileError> {
        if store_names.len() != self.feature_names.len() {
            return Err(ModelFileError::ColumnCount {
                model: self.feature_names.len(),
                store: store_names.len(),
            });
        }
        for (index, (m, s)) in self.feature_names.iter().zip(store_names).enumerate() {
            if m != s {
                return Err(ModelFileError::ColumnName {
                    index,
                    model: m.clone(),
                    store: s.clone(),
                });
            }
        }
        Ok(())
    }
}

pub fn to_bytes(file: &ModelFile) -> Result<Vec<u8>, ModelFileError> {
    Ok(serde_json::to_vec_pretty(file)?)
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelFile, ModelFileError> {
    let file: ModelFile = serde_json::from_slice(bytes)?;
    if file.format != MODEL_FORMAT {
        return Err(ModelFileError::Format(file.format));
    }
    if file.version != MODEL_VERSION {
        return Err(ModelFileError::Version(file.version));
    }
    Ok(file)
}

pub fn save(path: &Path, file: &ModelFile) -> Result<(), ModelFileError> {
    std::fs::write(path, to_bytes(file)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelFile, ModelFileError> {
    from_bytes(&std::fs::read(path)?)
}
