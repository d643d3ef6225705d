use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::analysis::{
    act_distribution, master_activation, write_act_distribution_csv, write_master_activation_csv, AnalysisError,
    DEFAULT_BUCKETS,
};
use crate::domain::{read_traces_jsonl, TraceError};
use crate::hierarchy::DEFAULT_SUB_POLICIES;
use crate::training::{EpochReport, EPOCHS_FILE, FINAL_TRACES_FILE, REWARD_CURVE_HEADER};

pub const EXPORT_DIR: &str = "exports";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("run directory {run_dir} lacks {missing}")]
    MissingRunArtifacts { run_dir: PathBuf, missing: String },
    #[error("figure {0} has no export (expected 2, 3 or 4)")]
    UnknownFigure(u32),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error(transparent)]
    Traces(#[from] TraceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub fn export_file_name(figure: u32) -> Option<&'static str> {
    match figure {
        2 => Some("fig2_reward_curve.csv"),
        3 => Some("fig3_act_distribution.csv"),
        4 => Some("fig4_master_activation.csv"),
        _ => None,
    }
}

fn require(run_dir: &Path, name: &str) -> Result<PathBuf, ExportError> {
    let path = run_dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(ExportError::MissingRunArtifacts { run_dir: run_dir.to_path_buf(), missing: name.to_string() })
    }
}

fn open(path: &Path) -> Result<BufReader<File>, ExportError> {
    File::open(path).map(BufReader::new).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<File, ExportError> {
    File::create(path).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

/// Writes the dataset behind figure 2, 3 or 4 to `run_dir/exports/` and returns its path.
/// Re-exporting overwrites with identical content.
pub fn export_figure(run_dir: &Path, figure: u32) -> Result<PathBuf, ExportError> {
    let name = export_file_name(figure).ok_or(ExportError::UnknownFigure(figure))?;
    let source = match figure {
        2 => require(run_dir, EPOCHS_FILE)?,
        _ => require(run_dir, FINAL_TRACES_FILE)?,
    };
    let dir = run_dir.join(EXPORT_DIR);
    fs::create_dir_all(&dir).map_err(|source| ExportError::Io { path: dir.clone(), source })?;
    let out = dir.join(name);
    match figure {
        2 => {
            let mut w = csv::Writer::from_writer(create(&out)?);
            let bad = |e: csv::Error| ExportError::Malformed { path: out.clone(), message: e.to_string() };
            w.write_record(REWARD_CURVE_HEADER).map_err(bad)?;
            for (i, line) in open(&source)?.lines().enumerate() {
                let line = line.map_err(|e| ExportError::Io { path: source.clone(), source: e })?;
                if line.trim().is_empty() {
                    continue;
                }
                let report: EpochReport = serde_json::from_str(&line)
                    .map_err(|e| ExportError::Malformed { path: source.clone(), message: format!("line {}: {e}", i + 1) })?;
                for p in &report.eval.per_profile {
                    w.write_record([
                        report.epoch.to_string(),
                        p.profile.to_string(),
                        p.summary.mean.to_string(),
                        p.summary.sd.to_string(),
                        p.summary.count.to_string(),
                    ])
                    .map_err(bad)?;
                }
            }
            w.flush().map_err(|e| ExportError::Io { path: out.clone(), source: e })?;
        }
        3 => {
            let traces = read_traces_jsonl(open(&source)?)?;
            write_act_distribution_csv(create(&out)?, &act_distribution(&traces, DEFAULT_BUCKETS)?)?;
        }
        _ => {
            let traces = read_traces_jsonl(open(&source)?)?;
            let m = master_activation(&traces, DEFAULT_BUCKETS, DEFAULT_SUB_POLICIES)?;
            write_master_activation_csv(create(&out)?, &m)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_dir_is_missing_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        for fig in [2, 3, 4] {
            assert!(matches!(export_figure(dir.path(), fig), Err(ExportError::MissingRunArtifacts { .. })));
        }
        assert!(matches!(export_figure(dir.path(), 5), Err(ExportError::UnknownFigure(5))));
    }
}
