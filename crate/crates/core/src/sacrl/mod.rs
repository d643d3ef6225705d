//! Discrete soft actor-critic and replay storage.

mod agent;
mod buffer;

pub use agent::{
    argmax, entropy, log_softmax, sample_categorical, softmax, ActMode, LossReport, SacAgent, SacConfig, SacError,
};
pub use buffer::{partition_by_master, ReplayBuffer, SampleFromEmpty, Transition};
