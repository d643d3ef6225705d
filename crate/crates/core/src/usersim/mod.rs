//! Scripted stochastic patient, the reward function and episode termination.

mod adapter;
mod params;
mod reward;
mod sim;

pub use adapter::{Exchange, LoopbackAdapter, LoopbackServer, Patient, SimulatorRequest, SimulatorResponse};
pub use params::{
    ActCategory, Band, ParamsError, ProfileParams, ResponseRow, SimParams, Weights, DEFAULT_PARAMS_TOML, PARAMS_VERSION,
};
pub use reward::{episode_ends_after, is_terminal, replay_total, reward, RewardRules};
pub use sim::{SimError, SimState};
