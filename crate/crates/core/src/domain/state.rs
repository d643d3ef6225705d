use serde::{Deserialize, Serialize};

use super::acts::{AgentDialogueAct, UserDialogueAct};

/// Hard cap on agent turns per episode.
pub const MAX_TURNS: u32 = 40;
/// Number of past (agent, user) exchanges kept as context.
pub const CONTEXT_TURNS: usize = 3;
/// Saturation cap for the master counters.
pub const COUNTER_CAP: u32 = 10;

const PAIR_DIM: usize = AgentDialogueAct::COUNT + UserDialogueAct::COUNT;

/// 13 + 9 + 1 + 3 * 22 = 89.
pub const SUB_STATE_DIM: usize = PAIR_DIM + 1 + CONTEXT_TURNS * PAIR_DIM;
pub const MASTER_STATE_DIM: usize = 3;
/// Input of the flat (non-hierarchical) policy: sub state followed by master state.
pub const FLAT_STATE_DIM: usize = SUB_STATE_DIM + MASTER_STATE_DIM;

/// Turn-level observation of a sub-policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubState {
    pub last_agent_act: Option<AgentDialogueAct>,
    pub last_user_act: UserDialogueAct,
    pub turn: u32,
    /// Most recent exchange first; `None` pads the start of an episode.
    pub recent: [Option<(AgentDialogueAct, UserDialogueAct)>; CONTEXT_TURNS],
}

impl Default for SubState {
    fn default() -> Self {
        Self::initial()
    }
}

impl SubState {
    pub fn initial() -> Self {
        SubState {
            last_agent_act: None,
            last_user_act: UserDialogueAct::None,
            turn: 0,
            recent: [None; CONTEXT_TURNS],
        }
    }

    /// State after one more exchange.
    pub fn advance(&self, agent: AgentDialogueAct, user: UserDialogueAct) -> Self {
        let mut recent = [None; CONTEXT_TURNS];
        recent[0] = Some((agent, user));
        recent[1..].copy_from_slice(&self.recent[..CONTEXT_TURNS - 1]);
        SubState {
            last_agent_act: Some(agent),
            last_user_act: user,
            turn: self.turn + 1,
            recent,
        }
    }
}

/// Progress counters observed by the master policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MasterState {
    pub info_count: u32,
    pub emotion_count: u32,
    pub realization_count: u32,
}

impl MasterState {
    pub fn new(info_count: u32, emotion_count: u32, realization_count: u32) -> Self {
        MasterState { info_count, emotion_count, realization_count }
    }

    /// Counts `user` if it is one of the three tracked acts.
    pub fn register(&mut self, user: UserDialogueAct) {
        match user {
            UserDialogueAct::SharePersonalInfo => self.info_count += 1,
            UserDialogueAct::ShareFeelings => self.emotion_count += 1,
            UserDialogueAct::RealizationUnderstanding => self.realization_count += 1,
            _ => {}
        }
    }

    pub fn registered(mut self, user: UserDialogueAct) -> Self {
        self.register(user);
        self
    }

    /// Coordinate-wise `self <= other`.
    pub fn le(&self, other: &MasterState) -> bool {
        self.info_count <= other.info_count
            && self.emotion_count <= other.emotion_count
            && self.realization_count <= other.realization_count
    }
}

fn one_hot_agent(out: &mut [f64], act: Option<AgentDialogueAct>) {
    if let Some(a) = act {
        out[a.index()] = 1.0;
    }
}

fn one_hot_user(out: &mut [f64], act: UserDialogueAct) {
    if !act.is_none() {
        out[act.index()] = 1.0;
    }
}

/// Writes the sub-state encoding into `out`, which must hold `SUB_STATE_DIM` zeros.
fn write_sub_state(state: &SubState, out: &mut [f64]) {
    debug_assert_eq!(out.len(), SUB_STATE_DIM);
    let (agent, rest) = out.split_at_mut(AgentDialogueAct::COUNT);
    one_hot_agent(agent, state.last_agent_act);
    let (user, rest) = rest.split_at_mut(UserDialogueAct::COUNT);
    one_hot_user(user, state.last_user_act);
    rest[0] = f64::from(state.turn) / f64::from(MAX_TURNS);
    for (slot, pair) in rest[1..].chunks_exact_mut(PAIR_DIM).zip(state.recent.iter()) {
        if let Some((a, u)) = pair {
            let (sa, su) = slot.split_at_mut(AgentDialogueAct::COUNT);
            one_hot_agent(sa, Some(*a));
            one_hot_user(su, *u);
        }
    }
}

/// `[onehot(last agent) | onehot(last user) | turn/40 | three context pairs]`.
pub fn encode_sub_state(state: &SubState) -> Vec<f64> {
    let mut out = vec![0.0; SUB_STATE_DIM];
    write_sub_state(state, &mut out);
    out
}

/// Saturating counter features in `[0, 1]`.
pub fn encode_master_state(state: &MasterState) -> Vec<f64> {
    let cap = f64::from(COUNTER_CAP);
    [state.info_count, state.emotion_count, state.realization_count]
        .iter()
        .map(|&c| f64::from(c.min(COUNTER_CAP)) / cap)
        .collect()
}

pub fn encode_flat_state(sub: &SubState, master: &MasterState) -> Vec<f64> {
    let mut out = vec![0.0; FLAT_STATE_DIM];
    write_sub_state(sub, &mut out[..SUB_STATE_DIM]);
    out[SUB_STATE_DIM..].copy_from_slice(&encode_master_state(master));
    out
}
