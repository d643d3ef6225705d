use serde::{Deserialize, Serialize};

use crate::domain::{AgentDialogueAct, EpisodeTrace, MasterState, UserDialogueAct, MAX_TURNS};

/// Per-act rewards and the counter gates that unlock the later ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardRules {
    pub change_talk: f64,
    pub sustain_talk: f64,
    pub feelings: f64,
    pub info: f64,
    pub realization: f64,
    pub planning: f64,
    /// Emotions required before information is rewarded.
    pub info_emotion_gate: u32,
    /// Pieces of information required before realization and planning are rewarded.
    pub realization_info_gate: u32,
    /// Realizations required before planning is rewarded.
    pub planning_realization_gate: u32,
}

impl Default for RewardRules {
    fn default() -> Self {
        RewardRules {
            change_talk: 5.0,
            sustain_talk: -5.0,
            feelings: 50.0,
            info: 100.0,
            realization: 150.0,
            planning: 200.0,
            info_emotion_gate: 2,
            realization_info_gate: 2,
            planning_realization_gate: 1,
        }
    }
}

impl RewardRules {
    /// Sum of every matching rule. `before` excludes the current `user` act.
    pub fn evaluate(&self, before: &MasterState, user: UserDialogueAct, agent: AgentDialogueAct) -> f64 {
        let mut r = match user {
            UserDialogueAct::ChangeUnhealthyBehavior => self.change_talk,
            UserDialogueAct::SustainUnhealthyBehavior => self.sustain_talk,
            UserDialogueAct::ShareFeelings => self.feelings,
            UserDialogueAct::SharePersonalInfo if before.emotion_count >= self.info_emotion_gate => self.info,
            UserDialogueAct::RealizationUnderstanding if before.info_count >= self.realization_info_gate => {
                self.realization
            }
            _ => 0.0,
        };
        if agent == AgentDialogueAct::PlanWithPatient
            && before.info_count >= self.realization_info_gate
            && before.realization_count >= self.planning_realization_gate
        {
            r += self.planning;
        }
        r
    }
}

/// Reward for one exchange under the default rules.
pub fn reward(counters_before: &MasterState, user_act: UserDialogueAct, agent_act: AgentDialogueAct) -> f64 {
    RewardRules::default().evaluate(counters_before, user_act, agent_act)
}

/// `turn` is the index of the agent turn that produced `agent_act`.
/// A closing act in the first two turns is read as a greeting.
pub fn is_terminal(turn: u32, agent_act: AgentDialogueAct) -> bool {
    turn >= MAX_TURNS || (agent_act == AgentDialogueAct::GreetingClosing && turn >= 2)
}

/// Whether the episode ends after the agent turn with index `turn`.
pub fn episode_ends_after(turn: u32, agent_act: AgentDialogueAct) -> bool {
    is_terminal(turn, agent_act) || turn + 1 >= MAX_TURNS
}

/// Recomputes a trace's total from its acts, checking the stored counters on the way.
pub fn replay_total(trace: &EpisodeTrace) -> Result<f64, String> {
    let mut counters = MasterState::default();
    let mut total = 0.0;
    for t in &trace.turns {
        if t.counters != counters {
            return Err(format!("turn {}: stored counters {:?} differ from replayed {:?}", t.turn, t.counters, counters));
        }
        total += reward(&counters, t.user_act, t.agent_act);
        counters.register(t.user_act);
    }
    Ok(total)
}
