use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::buffer::Transition;
use crate::neural::{soft_update, Adam, Mlp, NeuralError, HIDDEN_DIM};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SacError {
    #[error("sac update on an empty batch")]
    EmptyBatch,
    #[error("action {action} outside [0, {count})")]
    BadAction { action: usize, count: usize },
    #[error("non-finite parameters after update of {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SacConfig {
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Fixed entropy temperature.
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub hidden_dim: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig { actor_lr: 1e-4, critic_lr: 1e-4, alpha: 0.2, gamma: 0.99, tau: 0.005, hidden_dim: HIDDEN_DIM }
    }
}

impl SacConfig {
    pub fn with_lr(self, lr: f64) -> Self {
        SacConfig { actor_lr: lr, critic_lr: lr, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActMode {
    Sample,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub entropy: f64,
    pub batch_size: usize,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgentRecord {
    config: SacConfig,
    actor: Mlp,
    q1: Mlp,
    q2: Mlp,
    q1_target: Mlp,
    q2_target: Mlp,
}

/// Discrete soft actor-critic: categorical actor, twin per-action critics
/// with Polyak-averaged targets, fixed temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AgentRecord", into = "AgentRecord")]
pub struct SacAgent {
    pub config: SacConfig,
    pub actor: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    actor_opt: Adam,
    q1_opt: Adam,
    q2_opt: Adam,
}

impl TryFrom<AgentRecord> for SacAgent {
    type Error = String;

    fn try_from(r: AgentRecord) -> Result<Self, Self::Error> {
        let critics = [&r.q1, &r.q2, &r.q1_target, &r.q2_target];
        if critics.iter().any(|c| !c.same_shape(&r.q1))
            || r.actor.input_dim() != r.q1.input_dim()
            || r.actor.output_dim() != r.q1.output_dim()
        {
            return Err("actor and critic shapes disagree".into());
        }
        Ok(SacAgent {
            actor_opt: Adam::new(r.actor.params().len()),
            q1_opt: Adam::new(r.q1.params().len()),
            q2_opt: Adam::new(r.q2.params().len()),
            config: r.config,
            actor: r.actor,
            q1: r.q1,
            q2: r.q2,
            q1_target: r.q1_target,
            q2_target: r.q2_target,
        })
    }
}

impl From<SacAgent> for AgentRecord {
    fn from(a: SacAgent) -> Self {
        AgentRecord { config: a.config, actor: a.actor, q1: a.q1, q2: a.q2, q1_target: a.q1_target, q2_target: a.q2_target }
    }
}

impl SacAgent {
    pub fn new(state_dim: usize, action_count: usize, config: SacConfig, rng: &mut Rng) -> Self {
        let h = config.hidden_dim;
        let actor = Mlp::new(state_dim, h, action_count, rng);
        let q1 = Mlp::new(state_dim, h, action_count, rng);
        let q2 = Mlp::new(state_dim, h, action_count, rng);
        SacAgent {
            actor_opt: Adam::new(actor.params().len()),
            q1_opt: Adam::new(q1.params().len()),
            q2_opt: Adam::new(q2.params().len()),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            config,
            actor,
            q1,
            q2,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_count(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn policy(&self, state: &[f64]) -> Result<Vec<f64>, SacError> {
        Ok(softmax(&self.actor.forward(state)?))
    }

    pub fn act(&self, state: &[f64], mode: ActMode, rng: &mut Rng) -> Result<usize, SacError> {
        let logits = self.actor.forward(state)?;
        Ok(match mode {
            ActMode::Greedy => argmax(&logits),
            ActMode::Sample => sample_categorical(&softmax(&logits), rng),
        })
    }

    /// Per-action `min(q1, q2)` of the online critics.
    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, SacError> {
        let a = self.q1.forward(state)?;
        let b = self.q2.forward(state)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect())
    }

    fn soft_target(&self, tr: &Transition) -> Result<f64, SacError> {
        if tr.done {
            return Ok(tr.reward);
        }
        let alpha = self.config.alpha;
        let logits = self.actor.forward(&tr.next_state)?;
        let probs = softmax(&logits);
        let logp = log_softmax(&logits);
        let t1 = self.q1_target.forward(&tr.next_state)?;
        let t2 = self.q2_target.forward(&tr.next_state)?;
        let value: f64 = (0..probs.len()).map(|a| probs[a] * (t1[a].min(t2[a]) - alpha * logp[a])).sum();
        Ok(tr.reward + self.config.gamma * value)
    }

    /// Mean squared error of one critic against `targets`; applies one Adam step.
    fn fit_critic(
        net: &mut Mlp,
        opt: &mut Adam,
        batch: &[&Transition],
        targets: &[f64],
        lr: f64,
    ) -> Result<f64, SacError> {
        let n = batch.len() as f64;
        let mut grads = vec![0.0; net.params().len()];
        let mut upstream = vec![0.0; net.output_dim()];
        let mut loss = 0.0;
        for (tr, &y) in batch.iter().zip(targets) {
            let pass = net.forward_pass(&tr.state)?;
            let err = pass.output[tr.action] - y;
            loss += err * err;
            upstream.fill(0.0);
            upstream[tr.action] = 2.0 * err / n;
            net.backward(&tr.state, &pass, &upstream, &mut grads)?;
        }
        opt.step(net.params_mut(), &grads, lr);
        Ok(loss / n)
    }

    /// Critic targets, critic steps, actor step, then target averaging.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<LossReport, SacError> {
        if batch.is_empty() {
            return Err(SacError::EmptyBatch);
        }
        let count = self.action_count();
        for tr in batch {
            if tr.action >= count {
                return Err(SacError::BadAction { action: tr.action, count });
            }
        }
        let targets = batch.iter().map(|tr| self.soft_target(tr)).collect::<Result<Vec<_>, _>>()?;
        let lr = self.config.critic_lr;
        let critic1 = Self::fit_critic(&mut self.q1, &mut self.q1_opt, batch, &targets, lr)?;
        let critic2 = Self::fit_critic(&mut self.q2, &mut self.q2_opt, batch, &targets, lr)?;

        let alpha = self.config.alpha;
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.actor.params().len()];
        let mut actor_loss = 0.0;
        let mut mean_entropy = 0.0;
        for tr in batch {
            let pass = self.actor.forward_pass(&tr.state)?;
            let probs = softmax(&pass.output);
            let logp = log_softmax(&pass.output);
            let q = self.q_values(&tr.state)?;
            let f: Vec<f64> = (0..count).map(|a| alpha * logp[a] - q[a]).collect();
            let expected: f64 = probs.iter().zip(&f).map(|(p, fa)| p * fa).sum();
            actor_loss += expected;
            mean_entropy += entropy(&probs);
            // d/dz of sum_a pi_a f_a; the entropy term's own logit gradient cancels.
            let upstream: Vec<f64> = (0..count).map(|a| probs[a] * (f[a] - expected) / n).collect();
            self.actor.backward(&tr.state, &pass, &upstream, &mut grads)?;
        }
        self.actor_opt.step(self.actor.params_mut(), &grads, self.config.actor_lr);

        self.polyak(self.config.tau);
        for (name, net) in [("actor", &self.actor), ("q1", &self.q1), ("q2", &self.q2)] {
            if !net.is_finite() {
                return Err(SacError::NonFinite(name));
            }
        }
        Ok(LossReport { critic1, critic2, actor: actor_loss / n, entropy: mean_entropy / n, batch_size: batch.len() })
    }

    pub fn polyak(&mut self, tau: f64) {
        soft_update(&mut self.q1_target, &self.q1, tau);
        soft_update(&mut self.q2_target, &self.q2, tau);
    }

    /// Networks in a fixed order: actor, q1, q2, q1_target, q2_target.
    pub fn networks(&self) -> [&Mlp; 5] {
        [&self.actor, &self.q1, &self.q2, &self.q1_target, &self.q2_target]
    }

    pub fn networks_mut(&mut self) -> [&mut Mlp; 5] {
        [&mut self.actor, &mut self.q1, &mut self.q2, &mut self.q1_target, &mut self.q2_target]
    }

    pub fn fingerprint(&self) -> String {
        self.networks().iter().map(|n| n.fingerprint()).collect::<Vec<_>>().join(":")
    }
}

pub fn sample_categorical(probs: &[f64], rng: &mut Rng) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // Rounding left a sliver of mass past the end; give it to the last positive entry.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
