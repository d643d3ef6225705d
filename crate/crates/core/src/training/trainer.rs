use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, TrainConfig};
use crate::domain::{EpisodeTrace, UserProfile};
use crate::harness::{evaluate, EvalReport};
use crate::hierarchy::{
    flat_transitions, master_transitions, simulate_episode, sub_transitions, DialoguePolicy, EpisodeSpec, FlatManager,
    HierarchicalManager, HierarchyError, Manager, ManagerView, RandomPolicy,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sacrl::{partition_by_master, ActMode, LossReport, ReplayBuffer, SacAgent, SacError, Transition};
use crate::usersim::{ParamsError, ProfileParams, SimParams};

// Tags separating the derived random streams of one epoch.
const TAG_PROFILE: u64 = 0;
const TAG_SUB_ROLLOUT: u64 = 1;
const TAG_SUB_SAMPLE: u64 = 2;
const TAG_MASTER_ROLLOUT: u64 = 3;
const TAG_MASTER_SAMPLE: u64 = 4;
const TAG_EVAL: u64 = 5;
const TAG_INIT: u64 = 6;
const TAG_FINAL_EVAL: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    NoMaml,
    NoHrl,
    RandomBaseline,
}

impl Variant {
    pub const ALL: &'static [Variant] = &[Variant::Full, Variant::NoMaml, Variant::NoHrl, Variant::RandomBaseline];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoMaml => "no-maml",
            Variant::NoHrl => "no-hrl",
            Variant::RandomBaseline => "random",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "full" => Ok(Variant::Full),
            "nomaml" => Ok(Variant::NoMaml),
            "nohrl" | "flat" => Ok(Variant::NoHrl),
            "random" | "randombaseline" => Ok(Variant::RandomBaseline),
            _ => Err(format!("unknown variant `{s}` (expected full, no-maml, no-hrl or random)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Rollout(#[from] HierarchyError),
    #[error(transparent)]
    Sac(#[from] SacError),
    #[error("meta step: {0}")]
    Meta(#[from] MetaError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{context}: {message}")]
    Format { context: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetaError {
    #[error("network {network} differs in shape between the master and its clone")]
    ShapeMismatch { network: usize },
    #[error("meta step size must be positive and finite, got {0}")]
    BadStep(f64),
}

/// First-order meta step `theta <- theta + beta * (adapted - theta)` over all
/// five networks of the agent. `beta == 1` copies the adapted parameters exactly.
pub fn meta_update(theta: &mut SacAgent, adapted: &SacAgent, beta: f64) -> Result<(), MetaError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MetaError::BadStep(beta));
    }
    for (i, (t, a)) in theta.networks().iter().zip(adapted.networks()).enumerate() {
        if !t.same_shape(a) {
            return Err(MetaError::ShapeMismatch { network: i });
        }
    }
    for (t, a) in theta.networks_mut().into_iter().zip(adapted.networks()) {
        if beta == 1.0 {
            t.params_mut().copy_from_slice(a.params());
        } else {
            for (x, y) in t.params_mut().iter_mut().zip(a.params()) {
                *x += beta * (y - *x);
            }
        }
    }
    Ok(())
}

/// One optimizer step of one agent, as written to the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub epoch: usize,
    /// `sub`, `master` or `flat`.
    pub phase: String,
    /// Sub-policy index; zero for the master and flat agents.
    pub agent: usize,
    /// Per-agent update counter within the epoch.
    pub step: usize,
    pub batch_size: usize,
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub phase: String,
    pub agent: usize,
    pub updates: usize,
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub entropy: f64,
}

impl LossSummary {
    fn of(records: &[UpdateRecord], phase: &str, agent: usize) -> Self {
        let mine: Vec<&UpdateRecord> = records.iter().filter(|r| r.phase == phase && r.agent == agent).collect();
        let n = mine.len().max(1) as f64;
        let mean = |f: fn(&UpdateRecord) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
        LossSummary {
            phase: phase.to_string(),
            agent,
            updates: mine.len(),
            critic1: mean(|r| r.critic1),
            critic2: mean(|r| r.critic2),
            actor: mean(|r| r.actor),
            entropy: mean(|r| r.entropy),
        }
    }
}

/// Outcome of one epoch. Wall time is kept out of the serialized form and
/// out of equality so reports of identical runs compare equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub variant: Variant,
    /// Training profile fixed for this epoch.
    pub profile: UserProfile,
    pub eval: EvalReport,
    pub mean_reward: f64,
    pub sd_reward: f64,
    pub losses: Vec<LossSummary>,
    pub sub_transitions: usize,
    pub master_transitions: usize,
    pub fingerprint: String,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl PartialEq for EpochReport {
    fn eq(&self, o: &Self) -> bool {
        (self.epoch, self.variant, self.profile, &self.eval, self.mean_reward, self.sd_reward)
            == (o.epoch, o.variant, o.profile, &o.eval, o.mean_reward, o.sd_reward)
            && (&self.losses, self.sub_transitions, self.master_transitions, &self.fingerprint)
                == (&o.losses, o.sub_transitions, o.master_transitions, &o.fingerprint)
    }
}

/// Training state across epochs.
pub struct Trainer {
    pub config: TrainConfig,
    pub variant: Variant,
    pub sim_params: SimParams,
    pub manager: Manager,
    /// Master adapted during the latest epoch; evaluation uses it with the subs.
    pub adapted_master: Option<SacAgent>,
    pub epoch: usize,
    pub sub_buffer: ReplayBuffer,
    pub master_buffer: ReplayBuffer,
    shared_params: Vec<Arc<ProfileParams>>,
}

impl Trainer {
    pub fn new(config: TrainConfig, variant: Variant, sim_params: SimParams) -> Result<Self, TrainError> {
        config.validate()?;
        let mut rng = rng_from_seed(derive_seed(config.seed, &[TAG_INIT]));
        let manager = match variant {
            Variant::Full | Variant::NoMaml => Manager::Hierarchical(HierarchicalManager::new(
                config.sub_policies,
                config.window,
                config.master_sac(),
                config.sub_sac(),
                &mut rng,
            )),
            Variant::NoHrl => Manager::Flat(FlatManager::new(config.sub_sac(), &mut rng)),
            Variant::RandomBaseline => Manager::Random,
        };
        let shared_params = UserProfile::ALL.iter().map(|p| Arc::new(sim_params.profile(*p).clone())).collect();
        Ok(Trainer {
            config,
            variant,
            sim_params,
            manager,
            adapted_master: None,
            epoch: 0,
            sub_buffer: ReplayBuffer::new(),
            master_buffer: ReplayBuffer::new(),
            shared_params,
        })
    }

    /// Loads simulator parameters from `config.sim_params`, or the shipped defaults.
    pub fn from_config(config: TrainConfig, variant: Variant) -> Result<Self, TrainError> {
        let params = match &config.sim_params {
            Some(path) => SimParams::load(path)?,
            None => SimParams::default(),
        };
        Self::new(config, variant, params)
    }

    /// The policy evaluation runs: the adapted master with the sub-policies when one exists.
    pub fn eval_policy(&self) -> Box<dyn DialoguePolicy + '_> {
        eval_policy(&self.manager, self.adapted_master.as_ref())
    }

    pub fn evaluate(&self, n_per_profile: usize, seed: u64) -> Result<(EvalReport, Vec<EpisodeTrace>), TrainError> {
        Ok(evaluate(&*self.eval_policy(), &self.sim_params, UserProfile::ALL, n_per_profile, seed)?)
    }

    pub fn final_evaluation(&self) -> Result<(EvalReport, Vec<EpisodeTrace>), TrainError> {
        self.evaluate(self.config.final_eval_per_profile, derive_seed(self.config.seed, &[TAG_FINAL_EVAL]))
    }

    fn rollouts<P: DialoguePolicy + ?Sized>(
        &self,
        policy: &P,
        profile: UserProfile,
        tag: u64,
        range: std::ops::Range<usize>,
    ) -> Result<Vec<EpisodeTrace>, HierarchyError> {
        let epoch = self.epoch as u64;
        let params = &self.shared_params[profile.index()];
        range
            .into_par_iter()
            .map(|k| {
                let spec = EpisodeSpec::from_seed(profile, derive_seed(self.config.seed, &[epoch, tag, k as u64]));
                simulate_episode(policy, params.clone(), spec, ActMode::Sample)
            })
            .collect()
    }

    fn batches(&self, total: usize) -> Vec<std::ops::Range<usize>> {
        let step = self.config.parallel_rollouts;
        (0..total).step_by(step).map(|s| s..(s + step).min(total)).collect()
    }

    fn sample_rng(&self, tag: u64, batch: usize, round: usize) -> crate::rng::Rng {
        rng_from_seed(derive_seed(self.config.seed, &[self.epoch as u64, tag, batch as u64, round as u64]))
    }

    /// One epoch; returns the report and the per-update metrics.
    pub fn run_epoch(&mut self) -> Result<(EpochReport, Vec<UpdateRecord>), TrainError> {
        let started = Instant::now();
        let epoch = self.epoch;
        let profile =
            UserProfile::ALL[(derive_seed(self.config.seed, &[epoch as u64, TAG_PROFILE]) % UserProfile::COUNT as u64) as usize];
        let mut records = Vec::new();
        let (sub_count, master_count) = match self.variant {
            Variant::Full | Variant::NoMaml => self.hierarchical_epoch(profile, &mut records)?,
            Variant::NoHrl => (self.flat_epoch(profile, &mut records)?, 0),
            Variant::RandomBaseline => (0, 0),
        };

        let eval_seed = derive_seed(self.config.seed, &[epoch as u64, TAG_EVAL]);
        let (eval, _) = self.evaluate(self.config.dialogues_eval, eval_seed)?;

        if let (Manager::Hierarchical(m), Some(adapted)) = (&mut self.manager, &self.adapted_master) {
            let beta = if self.variant == Variant::NoMaml { 1.0 } else { self.config.meta_lr };
            meta_update(&mut m.master, adapted, beta)?;
        }
        self.sub_buffer.clear();
        self.master_buffer.clear();

        let mut losses = Vec::new();
        match &self.manager {
            Manager::Hierarchical(m) => {
                losses.extend((0..m.subs.len()).map(|i| LossSummary::of(&records, "sub", i)));
                losses.push(LossSummary::of(&records, "master", 0));
            }
            Manager::Flat(_) => losses.push(LossSummary::of(&records, "flat", 0)),
            Manager::Random => {}
        }
        let report = EpochReport {
            epoch,
            variant: self.variant,
            profile,
            mean_reward: eval.pooled.mean,
            sd_reward: eval.pooled.sd,
            eval,
            losses,
            sub_transitions: sub_count,
            master_transitions: master_count,
            fingerprint: manager_fingerprint(&self.manager),
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        self.epoch += 1;
        Ok((report, records))
    }

    fn hierarchical_epoch(
        &mut self,
        profile: UserProfile,
        records: &mut Vec<UpdateRecord>,
    ) -> Result<(usize, usize), TrainError> {
        let cfg = self.config.clone();
        let epoch = self.epoch;

        // Phase 1: sub-policies learn under the frozen master.
        let mut steps = vec![0usize; cfg.sub_policies];
        let mut sub_count = 0;
        for (b, range) in self.batches(cfg.dialogues_sub).into_iter().enumerate() {
            let traces = {
                let Manager::Hierarchical(m) = &self.manager else { unreachable!() };
                self.rollouts(m, profile, TAG_SUB_ROLLOUT, range)?
            };
            for t in &traces {
                let ts = sub_transitions(t, cfg.reward_scale);
                sub_count += ts.len();
                self.sub_buffer.extend(ts);
            }
            for round in 0..cfg.updates_per_batch {
                let mut rng = self.sample_rng(TAG_SUB_SAMPLE, b, round);
                let Manager::Hierarchical(m) = &mut self.manager else { unreachable!() };
                let batch = match self.sub_buffer.sample(cfg.batch_size, &mut rng) {
                    Ok(batch) => batch,
                    Err(_) => break,
                };
                let groups = partition_by_master(&batch, m.subs.len());
                let reports: Vec<Option<LossReport>> = m
                    .subs
                    .par_iter_mut()
                    .zip(groups.par_iter())
                    .map(|(sub, group)| if group.is_empty() { Ok(None) } else { sub.update(group).map(Some) })
                    .collect::<Result<_, SacError>>()?;
                for (i, r) in reports.into_iter().enumerate() {
                    if let Some(r) = r {
                        records.push(record(epoch, "sub", i, steps[i], &r));
                        steps[i] += 1;
                    }
                }
            }
        }

        // Phase 2: a clone of the master learns over the frozen sub-policies.
        let Manager::Hierarchical(m) = &self.manager else { unreachable!() };
        let mut clone = m.master.clone();
        let mut master_count = 0;
        let mut step = 0;
        for (b, range) in self.batches(cfg.dialogues_master).into_iter().enumerate() {
            let Manager::Hierarchical(m) = &self.manager else { unreachable!() };
            let view = ManagerView { master: &clone, subs: &m.subs, window: m.window };
            let traces = self.rollouts(&view, profile, TAG_MASTER_ROLLOUT, range)?;
            for t in &traces {
                let ts = master_transitions(t, cfg.window, cfg.reward_scale);
                master_count += ts.len();
                self.master_buffer.extend(ts);
            }
            for round in 0..cfg.updates_per_batch {
                let mut rng = self.sample_rng(TAG_MASTER_SAMPLE, b, round);
                let batch: Vec<&Transition> = match self.master_buffer.sample(cfg.batch_size, &mut rng) {
                    Ok(batch) => batch,
                    Err(_) => break,
                };
                let r = clone.update(&batch)?;
                records.push(record(epoch, "master", 0, step, &r));
                step += 1;
            }
        }
        self.adapted_master = Some(clone);
        Ok((sub_count, master_count))
    }

    fn flat_epoch(&mut self, profile: UserProfile, records: &mut Vec<UpdateRecord>) -> Result<usize, TrainError> {
        let cfg = self.config.clone();
        let epoch = self.epoch;
        let mut count = 0;
        let mut step = 0;
        for (b, range) in self.batches(cfg.dialogues_per_epoch()).into_iter().enumerate() {
            let traces = {
                let Manager::Flat(m) = &self.manager else { unreachable!() };
                self.rollouts(m, profile, TAG_SUB_ROLLOUT, range)?
            };
            for t in &traces {
                let ts = flat_transitions(t, cfg.reward_scale);
                count += ts.len();
                self.sub_buffer.extend(ts);
            }
            for round in 0..cfg.updates_per_batch {
                let mut rng = self.sample_rng(TAG_SUB_SAMPLE, b, round);
                let batch = match self.sub_buffer.sample(cfg.batch_size, &mut rng) {
                    Ok(batch) => batch,
                    Err(_) => break,
                };
                let Manager::Flat(m) = &mut self.manager else { unreachable!() };
                let r = m.agent.update(&batch)?;
                records.push(record(epoch, "flat", 0, step, &r));
                step += 1;
            }
        }
        Ok(count)
    }
}

impl fmt::Debug for Trainer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trainer").field("variant", &self.variant).field("epoch", &self.epoch).finish_non_exhaustive()
    }
}

fn record(epoch: usize, phase: &str, agent: usize, step: usize, r: &LossReport) -> UpdateRecord {
    UpdateRecord {
        epoch,
        phase: phase.to_string(),
        agent,
        step,
        batch_size: r.batch_size,
        critic1: r.critic1,
        critic2: r.critic2,
        actor: r.actor,
        entropy: r.entropy,
    }
}

/// Evaluation policy for a stored or live manager.
pub fn eval_policy<'a>(manager: &'a Manager, adapted: Option<&'a SacAgent>) -> Box<dyn DialoguePolicy + 'a> {
    match (manager, adapted) {
        (Manager::Hierarchical(m), Some(a)) => Box::new(ManagerView { master: a, subs: &m.subs, window: m.window }),
        (Manager::Hierarchical(m), None) => Box::new(m.view()),
        (Manager::Flat(m), _) => Box::new(m),
        (Manager::Random, _) => Box::new(RandomPolicy),
    }
}

/// Hash of every parameter of the manager.
pub fn manager_fingerprint(manager: &Manager) -> String {
    use sha2::{Digest, Sha256};
    let parts: Vec<String> = match manager {
        Manager::Hierarchical(m) => std::iter::once(&m.master).chain(&m.subs).map(SacAgent::fingerprint).collect(),
        Manager::Flat(m) => vec![m.agent.fingerprint()],
        Manager::Random => Vec::new(),
    };
    hex::encode(Sha256::digest(parts.join("|").as_bytes()))
}
