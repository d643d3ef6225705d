use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hierarchy::{DEFAULT_SUB_POLICIES, DEFAULT_WINDOW};
use crate::sacrl::SacConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("override `{0}`: expected key=value")]
    BadOverride(String),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

/// Reduced counts for laptop-sized runs. Applying the preset replaces the
/// corresponding top-level fields; learning rates and update cadence are
/// part of it because the smaller budget needs more steps per transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeskScale {
    pub epochs: usize,
    pub dialogues_master: usize,
    pub dialogues_sub: usize,
    pub dialogues_eval: usize,
    pub parallel_rollouts: usize,
    pub batch_size: usize,
    pub updates_per_batch: usize,
    pub sub_lr: f64,
    pub master_lr: f64,
    pub final_eval_per_profile: usize,
}

impl Default for DeskScale {
    fn default() -> Self {
        DeskScale {
            epochs: 15,
            dialogues_master: 40,
            dialogues_sub: 20,
            dialogues_eval: 5,
            parallel_rollouts: 5,
            batch_size: 256,
            updates_per_batch: 80,
            sub_lr: 3e-3,
            master_lr: 3e-3,
            final_eval_per_profile: 10,
        }
    }
}

/// Every knob of a training run. Unknown keys are rejected when loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Phase-2 dialogues, generated with the cloned master.
    pub dialogues_master: usize,
    /// Phase-1 dialogues, generated with the frozen master.
    pub dialogues_sub: usize,
    /// Greedy evaluation episodes per profile after every epoch.
    pub dialogues_eval: usize,
    pub parallel_rollouts: usize,
    pub window: u32,
    pub sub_policies: usize,
    pub sub_lr: f64,
    pub master_lr: f64,
    pub meta_lr: f64,
    pub batch_size: usize,
    /// SAC updates per agent after each completed rollout batch.
    pub updates_per_batch: usize,
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub hidden_dim: usize,
    /// Multiplies environment rewards before they enter the replay buffers.
    pub reward_scale: f64,
    /// Greedy episodes per profile for the end-of-run report.
    pub final_eval_per_profile: usize,
    /// Simulator parameter file; the shipped defaults when absent.
    pub sim_params: Option<PathBuf>,
    pub desk_scale: DeskScale,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 41,
            dialogues_master: 300,
            dialogues_sub: 150,
            dialogues_eval: 5,
            parallel_rollouts: 5,
            window: DEFAULT_WINDOW,
            sub_policies: DEFAULT_SUB_POLICIES,
            sub_lr: 1e-4,
            master_lr: 1e-3,
            meta_lr: 4e-4,
            batch_size: 1000,
            updates_per_batch: 1,
            seed: 0,
            alpha: 0.2,
            gamma: 0.99,
            tau: 0.005,
            hidden_dim: 32,
            reward_scale: 0.01,
            final_eval_per_profile: 10,
            sim_params: None,
            desk_scale: DeskScale::default(),
        }
    }
}

impl TrainConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: TrainConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: PathBuf::new(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// The shipped defaults with the desk preset applied.
    pub fn desk() -> Self {
        let mut c = Self::default();
        c.apply_desk_scale();
        c
    }

    pub fn apply_desk_scale(&mut self) {
        let d = self.desk_scale.clone();
        self.epochs = d.epochs;
        self.dialogues_master = d.dialogues_master;
        self.dialogues_sub = d.dialogues_sub;
        self.dialogues_eval = d.dialogues_eval;
        self.parallel_rollouts = d.parallel_rollouts;
        self.batch_size = d.batch_size;
        self.updates_per_batch = d.updates_per_batch;
        self.sub_lr = d.sub_lr;
        self.master_lr = d.master_lr;
        self.final_eval_per_profile = d.final_eval_per_profile;
    }

    /// Applies `key=value` overrides; dotted keys reach into tables, values parse as TOML
    /// and fall back to plain strings.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        if overrides.is_empty() {
            return Ok(());
        }
        let mut doc = toml::Value::try_from(&*self).expect("config serializes to TOML");
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw.split_once('=').ok_or_else(|| ConfigError::BadOverride(raw.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::BadOverride(raw.to_string()));
            }
            let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            let mut slot = &mut doc;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                let table = slot.as_table_mut().ok_or_else(|| invalid(key, "not a table"))?;
                if i + 1 == parts.len() {
                    let value = match (table.get(*part), &parsed) {
                        (Some(toml::Value::Float(_)), toml::Value::Integer(n)) => toml::Value::Float(*n as f64),
                        _ => parsed.clone(),
                    };
                    table.insert(part.to_string(), value);
                    break;
                }
                slot = table.get_mut(*part).ok_or_else(|| invalid(key, "unknown field"))?;
            }
        }
        let cfg: TrainConfig = doc.try_into().map_err(|e: toml::de::Error| invalid("override", e.message().to_string()))?;
        cfg.validate()?;
        *self = cfg;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("epochs", self.epochs),
            ("dialogues_eval", self.dialogues_eval),
            ("parallel_rollouts", self.parallel_rollouts),
            ("window", self.window as usize),
            ("sub_policies", self.sub_policies),
            ("batch_size", self.batch_size),
            ("updates_per_batch", self.updates_per_batch),
            ("hidden_dim", self.hidden_dim),
            ("desk_scale.epochs", self.desk_scale.epochs),
            ("desk_scale.parallel_rollouts", self.desk_scale.parallel_rollouts),
            ("desk_scale.batch_size", self.desk_scale.batch_size),
            ("desk_scale.updates_per_batch", self.desk_scale.updates_per_batch),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(invalid(field, "must be positive"));
            }
        }
        for (field, v) in [
            ("sub_lr", self.sub_lr),
            ("master_lr", self.master_lr),
            ("reward_scale", self.reward_scale),
            ("desk_scale.sub_lr", self.desk_scale.sub_lr),
            ("desk_scale.master_lr", self.desk_scale.master_lr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, format!("must be a positive number, got {v}")));
            }
        }
        if !(self.meta_lr > 0.0 && self.meta_lr <= 1.0) {
            return Err(invalid("meta_lr", format!("must lie in (0, 1], got {}", self.meta_lr)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1]"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(invalid("tau", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn sub_sac(&self) -> SacConfig {
        self.sac(self.sub_lr)
    }

    pub fn master_sac(&self) -> SacConfig {
        self.sac(self.master_lr)
    }

    fn sac(&self, lr: f64) -> SacConfig {
        SacConfig { actor_lr: lr, critic_lr: lr, alpha: self.alpha, gamma: self.gamma, tau: self.tau, hidden_dim: self.hidden_dim }
    }

    /// Dialogues generated per epoch by the two phases together.
    pub fn dialogues_per_epoch(&self) -> usize {
        self.dialogues_master + self.dialogues_sub
    }

    /// Hex SHA-256 of the canonical JSON form; identifies a run directory.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes to JSON");
        hex::encode(Sha256::digest(json))
    }
}
