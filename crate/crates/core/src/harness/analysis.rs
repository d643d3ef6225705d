use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{AgentDialogueAct, EpisodeTrace, UserProfile, MAX_TURNS};

pub const DEFAULT_BUCKETS: usize = 8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no traces to analyse")]
    EmptyTraces,
    #[error("bucket count must be between 1 and {MAX_TURNS}, got {0}")]
    BadBucketCount(usize),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Turn index to bucket, splitting the 40 turns evenly.
pub fn bucket_of(turn: u32, buckets: usize) -> usize {
    ((turn as usize * buckets) / MAX_TURNS as usize).min(buckets - 1)
}

/// First and last turn covered by `bucket`.
pub fn bucket_range(bucket: usize, buckets: usize) -> (u32, u32) {
    let turns = MAX_TURNS as usize;
    let start = (bucket * turns).div_ceil(buckets);
    let end = ((bucket + 1) * turns).div_ceil(buckets) - 1;
    (start as u32, end as u32)
}

/// Usage frequencies, `rows x buckets`. Each non-empty column sums to one;
/// columns no turn fell into are all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyMatrix {
    pub labels: Vec<String>,
    pub buckets: usize,
    pub values: Vec<Vec<f64>>,
    pub column_counts: Vec<usize>,
}

impl FrequencyMatrix {
    fn from_counts(labels: Vec<String>, counts: Vec<Vec<usize>>, buckets: usize) -> Self {
        let column_counts: Vec<usize> = (0..buckets).map(|b| counts.iter().map(|r| r[b]).sum()).collect();
        let values = counts
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&column_counts)
                    .map(|(&c, &total)| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                    .collect()
            })
            .collect();
        FrequencyMatrix { labels, buckets, values, column_counts }
    }

    pub fn column_sum(&self, bucket: usize) -> f64 {
        self.values.iter().map(|r| r[bucket]).sum()
    }

    fn bucket_headers(&self) -> Vec<String> {
        (0..self.buckets)
            .map(|b| {
                let (s, e) = bucket_range(b, self.buckets);
                format!("turns_{s}_{e}")
            })
            .collect()
    }
}

fn check(traces: &[EpisodeTrace], buckets: usize) -> Result<(), AnalysisError> {
    if traces.is_empty() {
        return Err(AnalysisError::EmptyTraces);
    }
    if buckets == 0 || buckets > MAX_TURNS as usize {
        return Err(AnalysisError::BadBucketCount(buckets));
    }
    Ok(())
}

/// Agent dialogue-act usage per turn bucket.
pub fn act_distribution(traces: &[EpisodeTrace], buckets: usize) -> Result<FrequencyMatrix, AnalysisError> {
    check(traces, buckets)?;
    let mut counts = vec![vec![0usize; buckets]; AgentDialogueAct::COUNT];
    for t in traces.iter().flat_map(|t| &t.turns) {
        counts[t.agent_act.index()][bucket_of(t.turn, buckets)] += 1;
    }
    let labels = AgentDialogueAct::ALL.iter().map(ToString::to_string).collect();
    Ok(FrequencyMatrix::from_counts(labels, counts, buckets))
}

/// Master-action usage per turn bucket, separately for each profile present in `traces`.
pub fn master_activation(
    traces: &[EpisodeTrace],
    buckets: usize,
    master_actions: usize,
) -> Result<Vec<(UserProfile, FrequencyMatrix)>, AnalysisError> {
    check(traces, buckets)?;
    let width = traces
        .iter()
        .flat_map(|t| &t.turns)
        .map(|t| t.master_action + 1)
        .max()
        .unwrap_or(0)
        .max(master_actions);
    let mut out = Vec::new();
    for &profile in UserProfile::ALL {
        let mine: Vec<&EpisodeTrace> = traces.iter().filter(|t| t.profile == profile).collect();
        if mine.is_empty() {
            continue;
        }
        let mut counts = vec![vec![0usize; buckets]; width];
        for t in mine.iter().flat_map(|t| &t.turns) {
            counts[t.master_action][bucket_of(t.turn, buckets)] += 1;
        }
        let labels = (0..width).map(|a| a.to_string()).collect();
        out.push((profile, FrequencyMatrix::from_counts(labels, counts, buckets)));
    }
    Ok(out)
}

/// Columns: `act_index,act,turns_<first>_<last>...`.
pub fn write_act_distribution_csv<W: Write>(w: W, m: &FrequencyMatrix) -> Result<(), AnalysisError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["act_index".to_string(), "act".to_string()];
    header.extend(m.bucket_headers());
    out.write_record(&header)?;
    for (i, (label, row)) in m.labels.iter().zip(&m.values).enumerate() {
        let mut rec = vec![i.to_string(), label.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns: `profile,master_action,turns_<first>_<last>...`.
pub fn write_master_activation_csv<W: Write>(
    w: W,
    per_profile: &[(UserProfile, FrequencyMatrix)],
) -> Result<(), AnalysisError> {
    let mut out = csv::Writer::from_writer(w);
    if let Some((_, first)) = per_profile.first() {
        let mut header = vec!["profile".to_string(), "master_action".to_string()];
        header.extend(first.bucket_headers());
        out.write_record(&header)?;
    }
    for (profile, m) in per_profile {
        for (label, row) in m.labels.iter().zip(&m.values) {
            let mut rec = vec![profile.to_string(), label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
