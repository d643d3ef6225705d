use std::sync::Arc;

use super::policy::{DialoguePolicy, EpisodeMemory, HierarchyError};
use crate::domain::{
    encode_flat_state, encode_master_state, encode_sub_state, EpisodeTrace, MasterState, SubState, Topic, TurnRecord,
    UserProfile,
};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::sacrl::{ActMode, Transition};
use crate::usersim::{episode_ends_after, reward, Exchange, Patient, ProfileParams, SimState, SimulatorRequest};

/// Identity of one simulated conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeSpec {
    pub profile: UserProfile,
    pub topic: Topic,
    pub seed: u64,
}

impl EpisodeSpec {
    /// Topic drawn from the seed; it does not influence the scripted dynamics.
    pub fn from_seed(profile: UserProfile, seed: u64) -> Self {
        let topic = Topic::ALL[(derive_seed(seed, &[2]) % Topic::COUNT as u64) as usize];
        EpisodeSpec { profile, topic, seed }
    }
}

/// Runs one conversation until termination, calling `observer` after every turn.
pub fn run_episode_with<P, T, F>(
    policy: &P,
    patient: &mut T,
    topic: Topic,
    seed: u64,
    mode: ActMode,
    rng: &mut Rng,
    mut observer: F,
) -> Result<EpisodeTrace, HierarchyError>
where
    P: DialoguePolicy + ?Sized,
    T: Patient + ?Sized,
    F: FnMut(&TurnRecord),
{
    let mut trace = EpisodeTrace::new(patient.profile(), topic, seed);
    let mut memory = EpisodeMemory::default();
    let mut sub = SubState::initial();
    let mut counters = MasterState::default();
    let mut history: Vec<Exchange> = Vec::new();
    for turn in 0.. {
        let choice = policy.choose(&mut memory, &sub, &counters, turn, mode, rng)?;
        let request = SimulatorRequest {
            profile: trace.profile,
            topic,
            turn,
            agent_act: choice.agent_act,
            history: history.clone(),
        };
        let user_act = patient.respond(&request)?;
        let record = TurnRecord {
            turn,
            master_action: choice.master_action,
            agent_act: choice.agent_act,
            user_act,
            reward: reward(&counters, user_act, choice.agent_act),
            counters,
        };
        observer(&record);
        trace.push(record);
        counters.register(user_act);
        sub = sub.advance(choice.agent_act, user_act);
        history.push(Exchange { agent: choice.agent_act, user: user_act });
        if episode_ends_after(turn, choice.agent_act) {
            break;
        }
    }
    Ok(trace)
}

pub fn run_episode<P, T>(
    policy: &P,
    patient: &mut T,
    topic: Topic,
    seed: u64,
    mode: ActMode,
    rng: &mut Rng,
) -> Result<EpisodeTrace, HierarchyError>
where
    P: DialoguePolicy + ?Sized,
    T: Patient + ?Sized,
{
    run_episode_with(policy, patient, topic, seed, mode, rng, |_| {})
}

/// Episode against the scripted simulator; patient and policy streams both derive from `spec.seed`.
pub fn simulate_episode<P: DialoguePolicy + ?Sized>(
    policy: &P,
    params: Arc<ProfileParams>,
    spec: EpisodeSpec,
    mode: ActMode,
) -> Result<EpisodeTrace, HierarchyError> {
    let mut sim = SimState::new(spec.profile, params, derive_seed(spec.seed, &[0]));
    let mut rng = rng_from_seed(derive_seed(spec.seed, &[1]));
    run_episode(policy, &mut sim, spec.topic, spec.seed, mode, &mut rng)
}

/// Turn-level transitions `(s_t, a_t, r_t, s_{t+1}, A_t)`.
pub fn sub_transitions(trace: &EpisodeTrace, reward_scale: f64) -> Vec<Transition> {
    let states = trace.sub_states();
    let last = trace.turns.len().saturating_sub(1);
    trace
        .turns
        .iter()
        .enumerate()
        .map(|(i, t)| Transition {
            state: encode_sub_state(&states[i]),
            action: t.agent_act.index(),
            reward: t.reward * reward_scale,
            next_state: encode_sub_state(&states[i + 1]),
            done: i == last,
            master_action: Some(t.master_action),
        })
        .collect()
}

/// Turn-level transitions for the flat policy, which also observes the counters.
pub fn flat_transitions(trace: &EpisodeTrace, reward_scale: f64) -> Vec<Transition> {
    let subs = trace.sub_states();
    let masters = trace.master_states();
    let last = trace.turns.len().saturating_sub(1);
    trace
        .turns
        .iter()
        .enumerate()
        .map(|(i, t)| Transition {
            state: encode_flat_state(&subs[i], &masters[i]),
            action: t.agent_act.index(),
            reward: t.reward * reward_scale,
            next_state: encode_flat_state(&subs[i + 1], &masters[i + 1]),
            done: i == last,
            master_action: None,
        })
        .collect()
}

/// One transition per decision window: counters at the window start, the
/// master action, the undiscounted sum of the window's rewards and the
/// counters after its last turn. A trailing partial window is included.
pub fn master_transitions(trace: &EpisodeTrace, window: u32, reward_scale: f64) -> Vec<Transition> {
    let masters = trace.master_states();
    let window = window.max(1) as usize;
    let n = trace.turns.len();
    (0..n)
        .step_by(window)
        .map(|start| {
            let end = (start + window).min(n);
            let total: f64 = trace.turns[start..end].iter().map(|t| t.reward).sum();
            Transition {
                state: encode_master_state(&masters[start]),
                action: trace.turns[start].master_action,
                reward: total * reward_scale,
                next_state: encode_master_state(&masters[end]),
                done: end == n,
                master_action: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AgentDialogueAct, UserDialogueAct, MAX_TURNS};
    use crate::hierarchy::{HierarchicalManager, RandomPolicy, ScriptedPolicy};
    use crate::rng::rng_from_seed;
    use crate::sacrl::SacConfig;
    use crate::usersim::{replay_total, LoopbackAdapter, SimParams};

    fn params(profile: UserProfile) -> Arc<ProfileParams> {
        Arc::new(SimParams::default().profile(profile).clone())
    }

    fn manager(seed: u64) -> HierarchicalManager {
        HierarchicalManager::new(6, 3, SacConfig::default(), SacConfig::default(), &mut rng_from_seed(seed))
    }

    #[test]
    fn greedy_episodes_are_reproducible() {
        let m = manager(3);
        let spec = EpisodeSpec::from_seed(UserProfile::Receptive, 77);
        let a = simulate_episode(&m, params(spec.profile), spec, ActMode::Greedy).unwrap();
        let b = simulate_episode(&m, params(spec.profile), spec, ActMode::Greedy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn episodes_respect_limits_and_windows() {
        let m = manager(4);
        for seed in 0..50 {
            let spec = EpisodeSpec::from_seed(UserProfile::ALL[seed as usize % 3], seed);
            let trace = simulate_episode(&m, params(spec.profile), spec, ActMode::Sample).unwrap();
            assert!(trace.len() <= MAX_TURNS as usize);
            let mut decisions = 0;
            for t in &trace.turns {
                if t.turn % 3 == 0 {
                    decisions += 1;
                } else {
                    assert_eq!(t.master_action, trace.turns[t.turn as usize - 1].master_action);
                }
            }
            assert!(decisions <= 14);
            let mt = master_transitions(&trace, 3, 1.0);
            assert_eq!(mt.len(), trace.len().div_ceil(3));
            let window_total: f64 = mt.iter().map(|t| t.reward).sum();
            assert_eq!(window_total, trace.total_reward);
            assert!(mt.last().unwrap().done && mt.iter().rev().skip(1).all(|t| !t.done));
            assert_eq!(replay_total(&trace).unwrap(), trace.total_reward);
        }
    }

    #[test]
    fn forty_turns_without_closing() {
        let policy = ScriptedPolicy::always(AgentDialogueAct::Reflection);
        let spec = EpisodeSpec::from_seed(UserProfile::OpenToChange, 1);
        let trace = simulate_episode(&policy, params(spec.profile), spec, ActMode::Greedy).unwrap();
        assert_eq!(trace.len(), 40);
    }

    #[test]
    fn closing_ends_the_episode_after_the_greeting_turns() {
        let policy = ScriptedPolicy::always(AgentDialogueAct::GreetingClosing);
        let spec = EpisodeSpec::from_seed(UserProfile::OpenToChange, 1);
        let trace = simulate_episode(&policy, params(spec.profile), spec, ActMode::Greedy).unwrap();
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn sub_transitions_chain() {
        let spec = EpisodeSpec::from_seed(UserProfile::ResistantToChange, 9);
        let trace = simulate_episode(&RandomPolicy, params(spec.profile), spec, ActMode::Sample).unwrap();
        let ts = sub_transitions(&trace, 0.5);
        assert_eq!(ts.len(), trace.len());
        for w in ts.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
            assert!(!w[0].done);
        }
        assert!(ts.last().unwrap().done);
        assert_eq!(ts[0].reward, trace.turns[0].reward * 0.5);
        let flat = flat_transitions(&trace, 1.0);
        assert!(flat.iter().all(|t| t.state.len() == 92 && t.master_action.is_none()));
    }

    #[test]
    fn loopback_patient_reproduces_scripted_episode() {
        let m = manager(5);
        let spec = EpisodeSpec::from_seed(UserProfile::Receptive, 123);
        let direct = simulate_episode(&m, params(spec.profile), spec, ActMode::Sample).unwrap();
        let mut patient = LoopbackAdapter::new(SimState::new(spec.profile, params(spec.profile), derive_seed(spec.seed, &[0])));
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[1]));
        let looped = run_episode(&m, &mut patient, spec.topic, spec.seed, ActMode::Sample, &mut rng).unwrap();
        assert_eq!(direct, looped);
    }

    #[test]
    fn single_window_single_policy_is_a_flat_rollout() {
        let m = HierarchicalManager::new(1, 1, SacConfig::default(), SacConfig::default(), &mut rng_from_seed(8));
        let spec = EpisodeSpec::from_seed(UserProfile::OpenToChange, 31);
        let trace = simulate_episode(&m, params(spec.profile), spec, ActMode::Greedy).unwrap();

        let mut sim = SimState::new(spec.profile, params(spec.profile), derive_seed(spec.seed, &[0]));
        let mut rng = rng_from_seed(0);
        let mut sub = SubState::initial();
        let mut acts = Vec::new();
        for turn in 0..MAX_TURNS {
            let a = m.subs[0].act(&encode_sub_state(&sub), ActMode::Greedy, &mut rng).unwrap();
            let a = AgentDialogueAct::from_index(a).unwrap();
            let u: UserDialogueAct = sim.step(a).unwrap();
            acts.push((a, u));
            sub = sub.advance(a, u);
            if episode_ends_after(turn, a) {
                break;
            }
        }
        let from_trace: Vec<_> = trace.turns.iter().map(|t| (t.agent_act, t.user_act)).collect();
        assert_eq!(from_trace, acts);
        assert!(trace.turns.iter().all(|t| t.master_action == 0));
    }
}
