use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trainer::{eval_policy, Trainer, Variant};
use crate::domain::TAXONOMY_VERSION;
use crate::hierarchy::{DialoguePolicy, Manager};
use crate::sacrl::SacAgent;

pub const CHECKPOINT_FORMAT: &str = "hrlmi-checkpoint";
pub const CHECKPOINT_LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("checkpoint {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("checkpoint version mismatch: {field} is {found}, this build expects {expected}")]
    CheckpointVersionMismatch { field: &'static str, found: String, expected: String },
}

/// Trained manager plus the metadata needed to interpret it. Optimizer state is not kept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub layout_version: u32,
    pub taxonomy_version: u32,
    pub variant: Variant,
    /// Epochs completed.
    pub epoch: usize,
    pub window: u32,
    pub sub_policies: usize,
    pub manager: Manager,
    pub adapted_master: Option<SacAgent>,
}

impl Checkpoint {
    pub fn of(trainer: &Trainer) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            layout_version: CHECKPOINT_LAYOUT_VERSION,
            taxonomy_version: TAXONOMY_VERSION,
            variant: trainer.variant,
            epoch: trainer.epoch,
            window: trainer.config.window,
            sub_policies: trainer.config.sub_policies,
            manager: trainer.manager.clone(),
            adapted_master: trainer.adapted_master.clone(),
        }
    }

    pub fn policy(&self) -> Box<dyn DialoguePolicy + '_> {
        eval_policy(&self.manager, self.adapted_master.as_ref())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, CheckpointError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CheckpointError::Malformed { path: path.to_string(), message: e.to_string() })?;
        // Versions are checked before the body so a layout change reports as such.
        let field = |name: &str| value.get(name).cloned().unwrap_or(serde_json::Value::Null);
        let checks: [(&'static str, serde_json::Value, serde_json::Value); 3] = [
            ("format", field("format"), CHECKPOINT_FORMAT.into()),
            ("layout_version", field("layout_version"), CHECKPOINT_LAYOUT_VERSION.into()),
            ("taxonomy_version", field("taxonomy_version"), TAXONOMY_VERSION.into()),
        ];
        for (name, found, expected) in checks {
            if found != expected {
                return Err(CheckpointError::CheckpointVersionMismatch {
                    field: name,
                    found: found.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
        serde_json::from_value(value).map_err(|e| CheckpointError::Malformed { path: path.to_string(), message: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text, &path.display().to_string())
    }
}
