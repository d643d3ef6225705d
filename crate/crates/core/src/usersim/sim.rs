use std::sync::Arc;

use rand::Rng as _;
use thiserror::Error;

use super::params::{ActCategory, Band, ProfileParams, Weights};
use crate::domain::{AgentDialogueAct, MasterState, UserDialogueAct, UserProfile, MAX_TURNS};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("simulator stepped at turn {0}, after the episode limit")]
    StepAfterTerminal(u32),
    #[error("simulator adapter: {0}")]
    Adapter(String),
}

/// Latent state of one scripted patient. Owns its random stream.
#[derive(Debug, Clone)]
pub struct SimState {
    pub profile: UserProfile,
    pub motivation: f64,
    pub engagement: f64,
    pub counters: MasterState,
    pub turn: u32,
    params: Arc<ProfileParams>,
    rng: Rng,
}

impl SimState {
    pub fn new(profile: UserProfile, params: Arc<ProfileParams>, seed: u64) -> Self {
        SimState {
            profile,
            motivation: params.initial_motivation.clamp(0.0, 1.0),
            engagement: params.initial_engagement.clamp(0.0, 1.0),
            counters: MasterState::default(),
            turn: 0,
            params,
            rng: rng_from_seed(seed),
        }
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    /// Applies the latent-state update of `act`, without sampling.
    fn apply(&mut self, act: AgentDialogueAct) {
        let p = &*self.params;
        let i = act.index();
        let gain = p.motivation_gain[i];
        // The gate reads engagement as it was when the act was made.
        let delta = if p.engagement_gated[i] && self.engagement <= p.engagement_gate { -0.5 * gain } else { gain };
        self.motivation = (self.motivation + delta + p.motivation_drift).clamp(0.0, 1.0);
        self.engagement = (self.engagement + p.engagement_gain[i]).clamp(0.0, 1.0);
    }

    /// Unnormalized response weights for `act` at the current latent levels.
    pub fn response_weights(&self, act: AgentDialogueAct) -> Weights {
        let p = &*self.params;
        let mut w = *p.weights(ActCategory::of(act), Band::of(self.motivation), Band::of(self.engagement));
        if act == AgentDialogueAct::GiveSolution && self.motivation <= p.premature_solution_threshold {
            w[UserDialogueAct::SustainUnhealthyBehavior.index()] += p.premature_solution_sustain_boost;
        }
        w
    }

    /// Distribution the next `step(act)` samples from.
    pub fn response_distribution(&self, act: AgentDialogueAct) -> Weights {
        let mut next = self.clone();
        next.apply(act);
        let mut w = next.response_weights(act);
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    }

    /// One patient turn in response to `act`.
    pub fn step(&mut self, act: AgentDialogueAct) -> Result<UserDialogueAct, SimError> {
        if self.turn >= MAX_TURNS {
            return Err(SimError::StepAfterTerminal(self.turn));
        }
        self.apply(act);
        let w = self.response_weights(act);
        let total: f64 = w.iter().sum();
        let mut target = self.rng.gen::<f64>() * total;
        let mut user = UserDialogueAct::None;
        for u in UserDialogueAct::SPOKEN {
            let wu = w[u.index()];
            if wu <= 0.0 {
                continue;
            }
            user = *u;
            if target < wu {
                break;
            }
            target -= wu;
        }
        debug_assert!(!user.is_none());
        self.counters.register(user);
        self.turn += 1;
        Ok(user)
    }
}
