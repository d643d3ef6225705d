//! Two-level dialogue management: a master policy choosing a phase every
//! `window` turns and per-phase sub-policies choosing dialogue acts.

mod episode;
mod policy;

pub use episode::{
    flat_transitions, master_transitions, run_episode, run_episode_with, simulate_episode, sub_transitions, EpisodeSpec,
};
pub use policy::{
    Choice, DialoguePolicy, EpisodeMemory, FlatManager, HierarchicalManager, HierarchyError, Manager, ManagerView, RandomPolicy,
    ScriptedPolicy, DEFAULT_SUB_POLICIES, DEFAULT_WINDOW,
};
