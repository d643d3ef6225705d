//! Simulator dynamics under a uniform-random agent.

use std::sync::Arc;

use hrlmi::domain::{AgentDialogueAct, UserProfile};
use hrlmi::harness::welch_t_test;
use hrlmi::rng::{derive_seed, rng_from_seed};
use hrlmi::usersim::{episode_ends_after, SimParams, SimState};
use rand::Rng as _;

const EPISODES: u64 = 1000;
const SIGNIFICANCE: f64 = 0.01;

/// Final motivation of each episode; panics if motivation ever leaves [0, 1].
fn final_motivations(profile: UserProfile) -> Vec<f64> {
    let params = Arc::new(SimParams::default().profile(profile).clone());
    (0..EPISODES)
        .map(|k| {
            let mut sim = SimState::new(profile, params.clone(), derive_seed(7, &[profile.index() as u64, k]));
            let mut agent = rng_from_seed(derive_seed(8, &[profile.index() as u64, k]));
            for turn in 0.. {
                let act = AgentDialogueAct::ALL[agent.gen_range(0..AgentDialogueAct::COUNT)];
                sim.step(act).unwrap();
                assert!((0.0..=1.0).contains(&sim.motivation), "motivation {} at turn {turn}", sim.motivation);
                assert!((0.0..=1.0).contains(&sim.engagement));
                if episode_ends_after(turn, act) {
                    break;
                }
            }
            sim.motivation
        })
        .collect()
}

#[test]
fn receptive_ends_more_motivated_than_resistant() {
    let receptive = final_motivations(UserProfile::Receptive);
    let resistant = final_motivations(UserProfile::ResistantToChange);
    let w = welch_t_test(&receptive, &resistant).unwrap();
    assert!(w.t > 0.0, "{w:?}");
    assert!(w.p_two_sided / 2.0 < SIGNIFICANCE, "{w:?}");
}

#[test]
fn open_profile_stays_bounded() {
    final_motivations(UserProfile::OpenToChange);
}
