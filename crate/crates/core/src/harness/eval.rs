use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::Summary;
use crate::domain::{EpisodeTrace, UserProfile};
use crate::hierarchy::{simulate_episode, DialoguePolicy, EpisodeSpec, HierarchyError};
use crate::rng::derive_seed;
use crate::sacrl::ActMode;
use crate::usersim::SimParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub profile: UserProfile,
    pub summary: Summary,
    pub seeds: Vec<u64>,
    /// Per-episode totals, in seed order.
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub per_profile: Vec<ProfileStats>,
    pub pooled: Summary,
    /// Set when no episode was run; the statistics are then zero by convention.
    pub empty: bool,
}

impl EvalReport {
    pub fn from_traces(seed: u64, profiles: &[UserProfile], traces: &[EpisodeTrace]) -> Self {
        let per_profile: Vec<ProfileStats> = profiles
            .iter()
            .map(|&profile| {
                let mine: Vec<&EpisodeTrace> = traces.iter().filter(|t| t.profile == profile).collect();
                let totals: Vec<f64> = mine.iter().map(|t| t.total_reward).collect();
                ProfileStats {
                    profile,
                    summary: Summary::of(&totals),
                    seeds: mine.iter().map(|t| t.seed).collect(),
                    totals,
                }
            })
            .collect();
        let all: Vec<f64> = per_profile.iter().flat_map(|p| p.totals.iter().copied()).collect();
        EvalReport { seed, pooled: Summary::of(&all), empty: all.is_empty(), per_profile }
    }

    pub fn all_totals(&self) -> Vec<f64> {
        self.per_profile.iter().flat_map(|p| p.totals.iter().copied()).collect()
    }

    pub fn profile(&self, profile: UserProfile) -> Option<&ProfileStats> {
        self.per_profile.iter().find(|p| p.profile == profile)
    }
}

/// Seeds of the evaluation episodes for `profile`.
pub fn eval_specs(profile: UserProfile, n_per_profile: usize, seed: u64) -> Vec<EpisodeSpec> {
    (0..n_per_profile)
        .map(|k| EpisodeSpec::from_seed(profile, derive_seed(seed, &[profile.index() as u64, k as u64])))
        .collect()
}

/// Greedy rollouts of `policy`, `n_per_profile` fixed-seed episodes per profile.
pub fn evaluate<P: DialoguePolicy + ?Sized>(
    policy: &P,
    params: &SimParams,
    profiles: &[UserProfile],
    n_per_profile: usize,
    seed: u64,
) -> Result<(EvalReport, Vec<EpisodeTrace>), HierarchyError> {
    let specs: Vec<EpisodeSpec> = profiles.iter().flat_map(|&p| eval_specs(p, n_per_profile, seed)).collect();
    let shared: Vec<Arc<_>> = UserProfile::ALL.iter().map(|p| Arc::new(params.profile(*p).clone())).collect();
    let traces = specs
        .par_iter()
        .map(|spec| simulate_episode(policy, shared[spec.profile.index()].clone(), *spec, ActMode::Greedy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((EvalReport::from_traces(seed, profiles, &traces), traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AgentDialogueAct;
    use crate::hierarchy::{RandomPolicy, ScriptedPolicy};
    use crate::rng::rng_from_seed;
    use crate::usersim::{reward, SimState};

    #[test]
    fn early_close_counts_only_the_first_three_turns() {
        let params = SimParams::default();
        let script = vec![AgentDialogueAct::AskCurrentEmotions, AgentDialogueAct::EmpathicReaction, AgentDialogueAct::GreetingClosing];
        let policy = ScriptedPolicy { script: script.clone(), fallback: AgentDialogueAct::Reflection };
        let (report, traces) = evaluate(&policy, &params, &[UserProfile::Receptive], 3, 5).unwrap();
        for (trace, spec) in traces.iter().zip(eval_specs(UserProfile::Receptive, 3, 5)) {
            // Hand simulation with the same patient stream.
            let mut sim = SimState::new(
                UserProfile::Receptive,
                Arc::new(params.profile(UserProfile::Receptive).clone()),
                derive_seed(spec.seed, &[0]),
            );
            let mut counters = crate::domain::MasterState::default();
            let mut total = 0.0;
            for a in &script {
                let u = sim.step(*a).unwrap();
                total += reward(&counters, u, *a);
                counters.register(u);
            }
            assert_eq!(trace.len(), 3);
            assert_eq!(trace.total_reward, total);
        }
        assert_eq!(report.per_profile[0].summary.count, 3);
    }

    #[test]
    fn zero_episodes_is_an_empty_report() {
        let (report, traces) = evaluate(&RandomPolicy, &SimParams::default(), UserProfile::ALL, 0, 1).unwrap();
        assert!(traces.is_empty());
        assert!(report.empty);
        assert_eq!(report.pooled, Summary { count: 0, mean: 0.0, sd: 0.0 });
    }

    #[test]
    fn same_seed_same_report() {
        let params = SimParams::default();
        let m = crate::hierarchy::HierarchicalManager::new(
            6,
            3,
            Default::default(),
            Default::default(),
            &mut rng_from_seed(2),
        );
        let a = evaluate(&m, &params, UserProfile::ALL, 4, 9).unwrap().0;
        let b = evaluate(&m, &params, UserProfile::ALL, 4, 9).unwrap().0;
        assert_eq!(a, b);
        assert_eq!(a.pooled.count, 12);
        assert_eq!(a.all_totals().len(), 12);
    }
}
