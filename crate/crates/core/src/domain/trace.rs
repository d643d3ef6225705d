use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::acts::{AgentDialogueAct, Topic, UserDialogueAct, UserProfile};
use super::state::{MasterState, SubState};

/// One agent turn and the patient's answer to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: u32,
    pub master_action: usize,
    pub agent_act: AgentDialogueAct,
    pub user_act: UserDialogueAct,
    pub reward: f64,
    /// Counters before `user_act` is registered.
    pub counters: MasterState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub profile: UserProfile,
    pub topic: Topic,
    pub seed: u64,
    pub turns: Vec<TurnRecord>,
    pub total_reward: f64,
}

impl EpisodeTrace {
    pub fn new(profile: UserProfile, topic: Topic, seed: u64) -> Self {
        EpisodeTrace { profile, topic, seed, turns: Vec::new(), total_reward: 0.0 }
    }

    pub fn push(&mut self, record: TurnRecord) {
        self.total_reward += record.reward;
        self.turns.push(record);
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Counters after the last turn.
    pub fn final_counters(&self) -> MasterState {
        self.turns
            .last()
            .map(|t| t.counters.registered(t.user_act))
            .unwrap_or_default()
    }

    /// Sub state observed before each turn, plus the state after the last one.
    pub fn sub_states(&self) -> Vec<SubState> {
        let mut out = Vec::with_capacity(self.turns.len() + 1);
        let mut s = SubState::initial();
        out.push(s);
        for t in &self.turns {
            s = s.advance(t.agent_act, t.user_act);
            out.push(s);
        }
        out
    }

    /// Master state observed before each turn, plus the state after the last one.
    pub fn master_states(&self) -> Vec<MasterState> {
        let mut out: Vec<MasterState> = self.turns.iter().map(|t| t.counters).collect();
        out.push(self.final_counters());
        out
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("trace line {line}: {message}")]
    Inconsistent { line: usize, message: String },
}

/// Flat JSON Lines record: one turn per line, tagged with its episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TraceLine {
    episode: usize,
    profile: UserProfile,
    topic: Topic,
    seed: u64,
    turn: u32,
    master_action: usize,
    agent_act: AgentDialogueAct,
    user_act: UserDialogueAct,
    reward: f64,
    info_count: u32,
    emotion_count: u32,
    realization_count: u32,
}

pub fn write_traces_jsonl<W: Write>(mut w: W, traces: &[EpisodeTrace]) -> std::io::Result<()> {
    for (episode, trace) in traces.iter().enumerate() {
        for t in &trace.turns {
            let line = TraceLine {
                episode,
                profile: trace.profile,
                topic: trace.topic,
                seed: trace.seed,
                turn: t.turn,
                master_action: t.master_action,
                agent_act: t.agent_act,
                user_act: t.user_act,
                reward: t.reward,
                info_count: t.counters.info_count,
                emotion_count: t.counters.emotion_count,
                realization_count: t.counters.realization_count,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_traces_jsonl<R: BufRead>(r: R) -> Result<Vec<EpisodeTrace>, TraceError> {
    let mut traces: Vec<EpisodeTrace> = Vec::new();
    let mut current: Option<usize> = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let rec: TraceLine =
            serde_json::from_str(&line).map_err(|source| TraceError::Json { line: lineno, source })?;
        if current != Some(rec.episode) {
            current = Some(rec.episode);
            traces.push(EpisodeTrace::new(rec.profile, rec.topic, rec.seed));
        }
        let trace = traces.last_mut().expect("pushed above");
        if rec.turn as usize != trace.turns.len() {
            return Err(TraceError::Inconsistent {
                line: lineno,
                message: format!("expected turn {}, found {}", trace.turns.len(), rec.turn),
            });
        }
        trace.push(TurnRecord {
            turn: rec.turn,
            master_action: rec.master_action,
            agent_act: rec.agent_act,
            user_act: rec.user_act,
            reward: rec.reward,
            counters: MasterState::new(rec.info_count, rec.emotion_count, rec.realization_count),
        });
    }
    Ok(traces)
}
