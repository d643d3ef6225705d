//! Property tests over random episodes, traces and analyses.

use std::sync::Arc;

use hrlmi::domain::{read_traces_jsonl, write_traces_jsonl, UserProfile, MAX_TURNS};
use hrlmi::harness::{act_distribution, master_activation};
use hrlmi::hierarchy::{simulate_episode, EpisodeSpec, HierarchicalManager, RandomPolicy};
use hrlmi::rng::rng_from_seed;
use hrlmi::sacrl::{ActMode, SacConfig};
use hrlmi::usersim::{replay_total, SimParams};
use proptest::prelude::*;

fn episode(profile: usize, seed: u64) -> hrlmi::domain::EpisodeTrace {
    let profile = UserProfile::ALL[profile];
    let params = Arc::new(SimParams::default().profile(profile).clone());
    simulate_episode(&RandomPolicy, params, EpisodeSpec::from_seed(profile, seed), ActMode::Sample).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn episodes_are_bounded_and_replayable(profile in 0usize..3, seed in any::<u64>()) {
        let t = episode(profile, seed);
        prop_assert!(!t.is_empty() && t.len() <= MAX_TURNS as usize);
        for (i, w) in t.turns.windows(2).enumerate() {
            prop_assert!(w[0].counters.le(&w[1].counters), "turn {}", i);
            prop_assert_eq!(w[1].turn, w[0].turn + 1);
        }
        prop_assert_eq!(replay_total(&t).unwrap(), t.total_reward);
    }

    #[test]
    fn traces_roundtrip_through_jsonl(seeds in proptest::collection::vec((0usize..3, any::<u64>()), 1..5)) {
        let traces: Vec<_> = seeds.iter().map(|&(p, s)| episode(p, s)).collect();
        let mut buf = Vec::new();
        write_traces_jsonl(&mut buf, &traces).unwrap();
        prop_assert_eq!(read_traces_jsonl(buf.as_slice()).unwrap(), traces);
    }

    #[test]
    fn analyses_ignore_trace_order(seeds in proptest::collection::vec((0usize..3, any::<u64>()), 1..6), buckets in 1usize..=10) {
        let traces: Vec<_> = seeds.iter().map(|&(p, s)| episode(p, s)).collect();
        let mut reversed = traces.clone();
        reversed.reverse();
        let a = act_distribution(&traces, buckets).unwrap();
        prop_assert_eq!(&a, &act_distribution(&reversed, buckets).unwrap());
        for b in 0..buckets {
            let s = a.column_sum(b);
            prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12, "bucket {} sums to {}", b, s);
        }
        prop_assert_eq!(master_activation(&traces, buckets, 6).unwrap(), master_activation(&reversed, buckets, 6).unwrap());
    }

    #[test]
    fn hierarchical_windows_hold_for_any_seed(seed in any::<u64>(), init in 0u64..50) {
        let m = HierarchicalManager::new(6, 3, SacConfig::default(), SacConfig::default(), &mut rng_from_seed(init));
        let params = Arc::new(SimParams::default().profile(UserProfile::Receptive).clone());
        let t = simulate_episode(&m, params, EpisodeSpec::from_seed(UserProfile::Receptive, seed), ActMode::Sample).unwrap();
        for w in t.turns.chunks(3) {
            prop_assert!(w.iter().all(|r| r.master_action == w[0].master_action));
        }
        let decisions = t.turns.chunks(3).count();
        prop_assert!(decisions <= 14);
    }
}
