//! Dialogue-act taxonomies, patient profiles, observations and their encodings.

mod acts;
mod state;
mod trace;

pub use acts::{AgentDialogueAct, Topic, UnknownName, UserDialogueAct, UserProfile, TAXONOMY_TOML, TAXONOMY_VERSION};
pub use state::{
    encode_flat_state, encode_master_state, encode_sub_state, MasterState, SubState, CONTEXT_TURNS, COUNTER_CAP,
    FLAT_STATE_DIM, MASTER_STATE_DIM, MAX_TURNS, SUB_STATE_DIM,
};
pub use trace::{read_traces_jsonl, write_traces_jsonl, EpisodeTrace, TraceError, TurnRecord};
