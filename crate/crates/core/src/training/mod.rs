//! The epoch loop: sub-policy phase, cloned-master phase, evaluation,
//! meta step, buffer reset; plus configuration, checkpoints and run output.

mod checkpoint;
mod config;
mod run;
mod trainer;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_FORMAT, CHECKPOINT_LAYOUT_VERSION};
pub use config::{ConfigError, DeskScale, TrainConfig};
pub use run::*;
pub use trainer::{
    eval_policy, manager_fingerprint, meta_update, EpochReport, LossSummary, MetaError, TrainError, Trainer,
    UpdateRecord, Variant,
};
