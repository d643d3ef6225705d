use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{encode_flat_state, encode_master_state, encode_sub_state, AgentDialogueAct, MasterState, SubState};
use crate::domain::{FLAT_STATE_DIM, MASTER_STATE_DIM, SUB_STATE_DIM};
use crate::rng::Rng;
use crate::sacrl::{ActMode, SacAgent, SacConfig, SacError};
use crate::usersim::SimError;

pub const DEFAULT_WINDOW: u32 = 3;
pub const DEFAULT_SUB_POLICIES: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("turn {turn}: no master action to reuse inside a window")]
    MissingMasterAction { turn: u32 },
    #[error("master action {action} has no sub-policy ({count} available)")]
    UnknownSubPolicy { action: usize, count: usize },
    #[error(transparent)]
    Sac(#[from] SacError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-episode scratch state of a policy. Lives with the rollout worker so
/// one policy snapshot can serve many episodes at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EpisodeMemory {
    pub current_master_action: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub master_action: usize,
    pub agent_act: AgentDialogueAct,
}

/// Something that picks the agent's dialogue act each turn.
pub trait DialoguePolicy: Sync {
    fn choose(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError>;
}

impl<T: DialoguePolicy + ?Sized> DialoguePolicy for &T {
    fn choose(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        (**self).choose(memory, sub, master, turn, mode, rng)
    }
}

fn agent_act(index: usize) -> AgentDialogueAct {
    AgentDialogueAct::from_index(index).expect("sub-policies emit one of the 13 agent acts")
}

/// A master policy over phases plus one sub-policy per phase. The master is
/// consulted at turns `t` with `t mod window == 0`; in between its last
/// choice is reused.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchicalManager {
    pub master: SacAgent,
    pub subs: Vec<SacAgent>,
    pub window: u32,
}

impl HierarchicalManager {
    pub fn new(sub_policies: usize, window: u32, master_cfg: SacConfig, sub_cfg: SacConfig, rng: &mut Rng) -> Self {
        assert!(sub_policies >= 1 && window >= 1, "need at least one sub-policy and a window of one turn");
        let master = SacAgent::new(MASTER_STATE_DIM, sub_policies, master_cfg, rng);
        let subs = (0..sub_policies)
            .map(|_| SacAgent::new(SUB_STATE_DIM, AgentDialogueAct::COUNT, sub_cfg, rng))
            .collect();
        HierarchicalManager { master, subs, window }
    }

    pub fn select(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        self.view().select(memory, sub, master, turn, mode, rng)
    }

    pub fn view(&self) -> ManagerView<'_> {
        ManagerView { master: &self.master, subs: &self.subs, window: self.window }
    }
}

/// A hierarchical manager assembled from borrowed parts, so a candidate
/// master can be rolled out against shared sub-policies without copying them.
#[derive(Debug, Clone, Copy)]
pub struct ManagerView<'a> {
    pub master: &'a SacAgent,
    pub subs: &'a [SacAgent],
    pub window: u32,
}

impl ManagerView<'_> {
    pub fn select(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        let master_action = if turn.is_multiple_of(self.window) {
            self.master.act(&encode_master_state(master), mode, rng)?
        } else {
            memory.current_master_action.ok_or(HierarchyError::MissingMasterAction { turn })?
        };
        let policy = self
            .subs
            .get(master_action)
            .ok_or(HierarchyError::UnknownSubPolicy { action: master_action, count: self.subs.len() })?;
        let act = policy.act(&encode_sub_state(sub), mode, rng)?;
        memory.current_master_action = Some(master_action);
        Ok(Choice { master_action, agent_act: agent_act(act) })
    }
}

impl DialoguePolicy for ManagerView<'_> {
    fn choose(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        self.select(memory, sub, master, turn, mode, rng)
    }
}

impl DialoguePolicy for HierarchicalManager {
    fn choose(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        self.select(memory, sub, master, turn, mode, rng)
    }
}

/// Single policy over the 13 acts, observing sub and master state together.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatManager {
    pub agent: SacAgent,
}

impl FlatManager {
    pub fn new(cfg: SacConfig, rng: &mut Rng) -> Self {
        FlatManager { agent: SacAgent::new(FLAT_STATE_DIM, AgentDialogueAct::COUNT, cfg, rng) }
    }
}

impl DialoguePolicy for FlatManager {
    fn choose(
        &self,
        _memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        _turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        let act = self.agent.act(&encode_flat_state(sub, master), mode, rng)?;
        Ok(Choice { master_action: 0, agent_act: agent_act(act) })
    }
}

/// Uniform over the 13 acts regardless of mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl DialoguePolicy for RandomPolicy {
    fn choose(
        &self,
        _memory: &mut EpisodeMemory,
        _sub: &SubState,
        _master: &MasterState,
        _turn: u32,
        _mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        Ok(Choice { master_action: 0, agent_act: agent_act(rng.gen_range(0..AgentDialogueAct::COUNT)) })
    }
}

/// Plays `script[t]` at turn `t`, then `fallback`.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    pub script: Vec<AgentDialogueAct>,
    pub fallback: AgentDialogueAct,
}

impl ScriptedPolicy {
    pub fn always(act: AgentDialogueAct) -> Self {
        ScriptedPolicy { script: Vec::new(), fallback: act }
    }
}

impl DialoguePolicy for ScriptedPolicy {
    fn choose(
        &self,
        _memory: &mut EpisodeMemory,
        _sub: &SubState,
        _master: &MasterState,
        turn: u32,
        _mode: ActMode,
        _rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        let act = self.script.get(turn as usize).copied().unwrap_or(self.fallback);
        Ok(Choice { master_action: 0, agent_act: act })
    }
}

/// Any of the trainable or reference managers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manager {
    Hierarchical(HierarchicalManager),
    Flat(FlatManager),
    Random,
}

impl DialoguePolicy for Manager {
    fn choose(
        &self,
        memory: &mut EpisodeMemory,
        sub: &SubState,
        master: &MasterState,
        turn: u32,
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<Choice, HierarchyError> {
        match self {
            Manager::Hierarchical(m) => m.choose(memory, sub, master, turn, mode, rng),
            Manager::Flat(m) => m.choose(memory, sub, master, turn, mode, rng),
            Manager::Random => RandomPolicy.choose(memory, sub, master, turn, mode, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Mlp;
    use crate::rng::rng_from_seed;

    /// Master whose greedy choice is `action` in every state.
    fn manager_with_master_bias(action: usize) -> HierarchicalManager {
        let mut rng = rng_from_seed(0);
        let mut m = HierarchicalManager::new(6, 3, SacConfig::default(), SacConfig::default(), &mut rng);
        let mut actor = Mlp::zeros(MASTER_STATE_DIM, 32, 6);
        let n = actor.params().len();
        actor.params_mut()[n - 6 + action] = 5.0;
        m.master.actor = actor;
        m
    }

    #[test]
    fn master_consulted_only_at_window_starts() {
        let manager = manager_with_master_bias(2);
        let mut rng = rng_from_seed(1);
        let sub = SubState::initial();
        let counters = MasterState::default();

        let mut memory = EpisodeMemory::default();
        let c0 = manager.select(&mut memory, &sub, &counters, 0, ActMode::Greedy, &mut rng).unwrap();
        assert_eq!(c0.master_action, 2);

        // A stored action is reused at t = 1, 2 even though the master would pick 2.
        let mut memory = EpisodeMemory { current_master_action: Some(4) };
        for t in [1, 2] {
            let c = manager.select(&mut memory, &sub, &counters, t, ActMode::Greedy, &mut rng).unwrap();
            assert_eq!(c.master_action, 4, "turn {t}");
        }
        let c3 = manager.select(&mut memory, &sub, &counters, 3, ActMode::Greedy, &mut rng).unwrap();
        assert_eq!(c3.master_action, 2);
        assert_eq!(memory.current_master_action, Some(2));
    }

    #[test]
    fn missing_master_action_inside_window() {
        let manager = manager_with_master_bias(0);
        let err = manager
            .select(
                &mut EpisodeMemory::default(),
                &SubState::initial(),
                &MasterState::default(),
                1,
                ActMode::Greedy,
                &mut rng_from_seed(0),
            )
            .unwrap_err();
        assert_eq!(err, HierarchyError::MissingMasterAction { turn: 1 });
    }

    #[test]
    fn scripted_policy_follows_script() {
        let p = ScriptedPolicy { script: vec![AgentDialogueAct::GreetingClosing], fallback: AgentDialogueAct::Reflection };
        let mut mem = EpisodeMemory::default();
        let mut rng = rng_from_seed(0);
        let s = SubState::initial();
        let m = MasterState::default();
        assert_eq!(p.choose(&mut mem, &s, &m, 0, ActMode::Greedy, &mut rng).unwrap().agent_act, AgentDialogueAct::GreetingClosing);
        assert_eq!(p.choose(&mut mem, &s, &m, 5, ActMode::Greedy, &mut rng).unwrap().agent_act, AgentDialogueAct::Reflection);
    }

    #[test]
    fn flat_manager_is_one_network_set() {
        let flat = FlatManager::new(SacConfig::default(), &mut rng_from_seed(0));
        assert_eq!(flat.agent.state_dim(), 92);
        assert_eq!(flat.agent.action_count(), 13);
    }
}
