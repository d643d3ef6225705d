//! Two-state chain for checking discrete SAC against tabular soft value iteration.
//!
//! State 0 offers a small immediate reward for staying (action 0) or a move to
//! state 1 (action 1). State 1 pays 1 for staying (action 1) and returns to
//! state 0 otherwise. Extra "padding" actions behave like action 0 but cost 0.5.

use hrlmi::rng::{rng_from_seed, Rng};
use hrlmi::sacrl::{argmax, ActMode, ReplayBuffer, SacAgent, SacConfig, Transition};
use rand::Rng as _;

pub const STATES: usize = 2;
pub const ALPHA: f64 = 0.2;
pub const GAMMA: f64 = 0.5;

pub fn step(state: usize, action: usize) -> (f64, usize) {
    match (state, action) {
        (0, 0) => (0.2, 0),
        (0, 1) => (0.0, 1),
        (1, 1) => (1.0, 1),
        (1, 0) => (0.0, 0),
        (s, _) => (step(s, 0).0 - 0.5, step(s, 0).1),
    }
}

pub fn encode(state: usize) -> Vec<f64> {
    let mut v = vec![0.0; STATES];
    v[state] = 1.0;
    v
}

/// Soft-optimal Q by value iteration until successive sweeps differ by < 1e-13.
pub fn soft_value_iteration(actions: usize) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; actions]; STATES];
    loop {
        let v: Vec<f64> = q
            .iter()
            .map(|row| {
                let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + ALPHA * row.iter().map(|x| ((x - m) / ALPHA).exp()).sum::<f64>().ln()
            })
            .collect();
        let mut delta: f64 = 0.0;
        let mut next = q.clone();
        for s in 0..STATES {
            for a in 0..actions {
                let (r, s2) = step(s, a);
                next[s][a] = r + GAMMA * v[s2];
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-13 {
            return q;
        }
    }
}

pub fn config() -> SacConfig {
    SacConfig { actor_lr: 3e-3, critic_lr: 3e-3, alpha: ALPHA, gamma: GAMMA, tau: 0.05, hidden_dim: 32 }
}

fn transition(s: usize, a: usize) -> Transition {
    let (r, s2) = step(s, a);
    Transition { state: encode(s), action: a, reward: r, next_state: encode(s2), done: false, master_action: None }
}

#[derive(Debug)]
pub struct OracleResult {
    pub tabular: Vec<Vec<f64>>,
    pub learned: Vec<Vec<f64>>,
    pub max_q_error: f64,
    pub greedy_matches: bool,
    pub updates: usize,
}

/// Trains with `updates` SAC steps. With two actions the replay is filled by
/// the agent's own sampled actions from uniformly drawn states; with padding
/// every state-action pair is replayed so rarely chosen actions still get targets.
pub fn train(actions: usize, updates: usize, seed: u64) -> OracleResult {
    let mut rng: Rng = rng_from_seed(seed);
    let mut agent = SacAgent::new(STATES, actions, config(), &mut rng);
    let mut buffer = ReplayBuffer::new();
    let exhaustive: Vec<Transition> =
        (0..STATES).flat_map(|s| (0..actions).map(move |a| transition(s, a))).collect();
    for _ in 0..updates {
        if actions == 2 {
            for _ in 0..4 {
                let s = rng.gen_range(0..STATES);
                let a = agent.act(&encode(s), ActMode::Sample, &mut rng).unwrap();
                buffer.push(transition(s, a));
            }
            let batch = buffer.sample(64, &mut rng).unwrap();
            agent.update(&batch).unwrap();
        } else {
            let batch: Vec<&Transition> = exhaustive.iter().collect();
            agent.update(&batch).unwrap();
        }
    }
    let tabular = soft_value_iteration(actions);
    let learned: Vec<Vec<f64>> = (0..STATES).map(|s| agent.q_values(&encode(s)).unwrap()).collect();
    let max_q_error = tabular
        .iter()
        .zip(&learned)
        .flat_map(|(t, l)| t.iter().zip(l).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let greedy_matches = (0..STATES).all(|s| {
        agent.act(&encode(s), ActMode::Greedy, &mut rng).unwrap() == argmax(&tabular[s])
    });
    OracleResult { tabular, learned, max_q_error, greedy_matches, updates }
}
