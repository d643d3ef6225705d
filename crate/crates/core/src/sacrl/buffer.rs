use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    /// Master action in force when a turn-level transition was generated.
    pub master_action: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sampled from an empty replay buffer")]
pub struct SampleFromEmpty;

/// Unbounded replay store; the training loop empties it once per epoch.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    transitions: Vec<Transition>,
}

impl ReplayBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn extend<I: IntoIterator<Item = Transition>>(&mut self, it: I) {
        self.transitions.extend(it);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transition> {
        self.transitions.iter()
    }

    /// `n` distinct transitions when the buffer holds at least `n`,
    /// otherwise `n` draws with replacement.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<&Transition>, SampleFromEmpty> {
        let len = self.transitions.len();
        if len == 0 {
            return Err(SampleFromEmpty);
        }
        Ok(if n <= len {
            index::sample(rng, len, n).into_iter().map(|i| &self.transitions[i]).collect()
        } else {
            (0..n).map(|_| &self.transitions[rng.gen_range(0..len)]).collect()
        })
    }

    pub fn filter_by_master(&self, master_action: usize) -> Vec<&Transition> {
        self.transitions.iter().filter(|t| t.master_action == Some(master_action)).collect()
    }
}

/// Splits a batch by master action; slot `i` holds the transitions with `A = i`.
pub fn partition_by_master<'a>(batch: &[&'a Transition], groups: usize) -> Vec<Vec<&'a Transition>> {
    let mut out = vec![Vec::new(); groups];
    for t in batch {
        if let Some(a) = t.master_action.filter(|&a| a < groups) {
            out[a].push(*t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn t(master: usize, reward: f64) -> Transition {
        Transition { state: vec![0.0], action: 0, reward, next_state: vec![0.0], done: false, master_action: Some(master) }
    }

    #[test]
    fn push_and_len() {
        let mut b = ReplayBuffer::new();
        for i in 0..3 {
            b.push(t(i, 0.0));
        }
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn filter_partitions_the_buffer() {
        let mut b = ReplayBuffer::new();
        for i in 0..50 {
            b.push(t(i % 6, i as f64));
        }
        let total: usize = (0..6).map(|i| b.filter_by_master(i).len()).sum();
        assert_eq!(total, b.len());
        assert!(b.filter_by_master(2).iter().all(|x| x.master_action == Some(2)));
        let all: Vec<&Transition> = b.iter().collect();
        let parts = partition_by_master(&all, 6);
        assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), 50);
        assert_eq!(parts[2], b.filter_by_master(2));
    }

    #[test]
    fn clear_then_sample_fails() {
        let mut b = ReplayBuffer::new();
        b.push(t(0, 0.0));
        b.clear();
        assert!(b.is_empty());
        assert_eq!(b.sample(4, &mut rng_from_seed(0)), Err(SampleFromEmpty));
    }

    #[test]
    fn sampling_is_reproducible_and_sized() {
        let mut b = ReplayBuffer::new();
        for i in 0..10 {
            b.push(t(0, i as f64));
        }
        let a = b.sample(1000, &mut rng_from_seed(3)).unwrap();
        let c = b.sample(1000, &mut rng_from_seed(3)).unwrap();
        assert_eq!(a.len(), 1000);
        assert_eq!(a, c);
        let distinct = b.sample(10, &mut rng_from_seed(4)).unwrap();
        let mut rewards: Vec<f64> = distinct.iter().map(|x| x.reward).collect();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, (0..10).map(f64::from).collect::<Vec<_>>());
    }
}
