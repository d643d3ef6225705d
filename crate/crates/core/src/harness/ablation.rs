use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::eval::EvalReport;
use super::stats::{difference_standard_error, welch_t_test, WelchTest};
use crate::training::{train, EpochReport, TrainConfig, TrainError, Variant};

/// A training variant over a shared configuration; variants differ only in
/// the meta step (NoMaml), the manager structure (NoHrl) or the absence of
/// learning (RandomBaseline).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub variant: Variant,
    pub config: TrainConfig,
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    pub variant: Variant,
    pub run_dir: PathBuf,
    pub epochs: Vec<EpochReport>,
    /// Greedy evaluation after the last epoch.
    pub report: EvalReport,
}

/// Trains the variant to completion in its own run directory. RandomBaseline
/// skips training and only runs the final evaluation.
pub fn run_ablation(spec: &AblationSpec, out_root: &Path) -> Result<AblationOutcome, TrainError> {
    let mut config = spec.config.clone();
    if spec.variant == Variant::RandomBaseline {
        config.epochs = config.epochs.min(1);
    }
    let run = train(&config, spec.variant, out_root, |_| {})?;
    let epochs = if spec.variant == Variant::RandomBaseline { Vec::new() } else { run.reports };
    Ok(AblationOutcome { variant: spec.variant, run_dir: run.run_dir, epochs, report: run.final_eval })
}

/// Difference of pooled means with its standard error and Welch's test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub difference: f64,
    pub standard_error: f64,
    pub welch: Option<WelchTest>,
}

impl Comparison {
    /// Difference in units of its standard error; infinite when the spread is zero and the means differ.
    pub fn z(&self) -> f64 {
        if self.standard_error > 0.0 {
            self.difference / self.standard_error
        } else if self.difference == 0.0 {
            0.0
        } else {
            self.difference.signum() * f64::INFINITY
        }
    }
}

pub fn compare(a: &EvalReport, b: &EvalReport) -> Comparison {
    let (ta, tb) = (a.all_totals(), b.all_totals());
    Comparison {
        mean_a: a.pooled.mean,
        mean_b: b.pooled.mean,
        difference: a.pooled.mean - b.pooled.mean,
        standard_error: difference_standard_error(&a.pooled, &b.pooled),
        welch: welch_t_test(&ta, &tb),
    }
}
