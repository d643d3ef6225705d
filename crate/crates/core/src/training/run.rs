use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::trainer::{EpochReport, TrainError, Trainer, Variant};
use crate::domain::write_traces_jsonl;
use crate::harness::EvalReport;

pub const CONFIG_FILE: &str = "config.json";
pub const SIM_PARAMS_FILE: &str = "sim_params.toml";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const EPOCHS_FILE: &str = "epochs.jsonl";
pub const TIMING_FILE: &str = "timing.jsonl";
pub const REWARD_CURVE_FILE: &str = "reward_curve.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT_FILE: &str = "checkpoint.json";
pub const FINAL_EVAL_FILE: &str = "final_eval.json";
pub const FINAL_TRACES_FILE: &str = "final_eval_traces.jsonl";
pub const REWARD_CURVE_HEADER: [&str; 5] = ["epoch", "profile", "mean_reward", "sd_reward", "episodes"];

/// `{variant}-{first 12 hex digits of the config hash}-s{seed}`.
pub fn run_dir_name(config: &TrainConfig, variant: Variant) -> String {
    format!("{}-{}-s{}", variant, &config.hash()[..12], config.seed)
}

pub fn epoch_checkpoint_path(run_dir: &Path, epoch: usize) -> PathBuf {
    run_dir.join(CHECKPOINT_DIR).join(format!("epoch_{epoch:03}.json"))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub reports: Vec<EpochReport>,
    pub final_eval: EvalReport,
    pub trainer: Trainer,
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> TrainError {
    let context = context.into();
    move |source| TrainError::Io { context, source }
}

fn create(path: &Path) -> Result<BufWriter<File>, TrainError> {
    Ok(BufWriter::new(File::create(path).map_err(io(format!("creating {}", path.display())))?))
}

fn json_line<W: Write, T: Serialize>(w: &mut W, value: &T, path: &Path) -> Result<(), TrainError> {
    let line = serde_json::to_string(value).expect("records serialize");
    writeln!(w, "{line}").map_err(io(format!("writing {}", path.display())))
}

#[derive(Serialize)]
struct Timing {
    epoch: usize,
    wall_time_s: f64,
}

/// Trains `variant` for `config.epochs` epochs inside a fresh run directory under `out_root`.
/// `progress` sees every epoch report as it is produced.
pub fn train(
    config: &TrainConfig,
    variant: Variant,
    out_root: &Path,
    mut progress: impl FnMut(&EpochReport),
) -> Result<RunOutcome, TrainError> {
    let mut trainer = Trainer::from_config(config.clone(), variant)?;
    let run_dir = out_root.join(run_dir_name(config, variant));
    fs::create_dir_all(run_dir.join(CHECKPOINT_DIR)).map_err(io(format!("creating {}", run_dir.display())))?;

    let config_json = serde_json::to_string_pretty(config).expect("config serializes");
    fs::write(run_dir.join(CONFIG_FILE), config_json + "\n").map_err(io("writing config.json"))?;
    fs::write(run_dir.join(SIM_PARAMS_FILE), trainer.sim_params.to_toml_string()).map_err(io("writing sim_params.toml"))?;

    let metrics_path = run_dir.join(METRICS_FILE);
    let epochs_path = run_dir.join(EPOCHS_FILE);
    let timing_path = run_dir.join(TIMING_FILE);
    let curve_path = run_dir.join(REWARD_CURVE_FILE);
    let mut metrics = create(&metrics_path)?;
    let mut epochs = create(&epochs_path)?;
    let mut timing = create(&timing_path)?;
    let mut curve = csv::Writer::from_writer(create(&curve_path)?);
    let csv_err = |e: csv::Error| TrainError::Format { context: REWARD_CURVE_FILE.to_string(), message: e.to_string() };
    curve.write_record(REWARD_CURVE_HEADER).map_err(csv_err)?;

    let mut reports = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (report, updates) = trainer.run_epoch()?;
        for u in &updates {
            json_line(&mut metrics, u, &metrics_path)?;
        }
        json_line(&mut epochs, &report, &epochs_path)?;
        json_line(&mut timing, &Timing { epoch: report.epoch, wall_time_s: report.wall_time_s }, &timing_path)?;
        for p in &report.eval.per_profile {
            curve
                .write_record([
                    report.epoch.to_string(),
                    p.profile.to_string(),
                    p.summary.mean.to_string(),
                    p.summary.sd.to_string(),
                    p.summary.count.to_string(),
                ])
                .map_err(csv_err)?;
        }
        Checkpoint::of(&trainer)
            .save(&epoch_checkpoint_path(&run_dir, report.epoch))
            .map_err(|e| TrainError::Format { context: "saving checkpoint".into(), message: e.to_string() })?;
        progress(&report);
        reports.push(report);
    }
    metrics.flush().map_err(io("writing metrics.jsonl"))?;
    epochs.flush().map_err(io("writing epochs.jsonl"))?;
    timing.flush().map_err(io("writing timing.jsonl"))?;
    curve.flush().map_err(io("writing reward_curve.csv"))?;

    Checkpoint::of(&trainer)
        .save(&run_dir.join(FINAL_CHECKPOINT_FILE))
        .map_err(|e| TrainError::Format { context: "saving checkpoint".into(), message: e.to_string() })?;
    let (final_eval, traces) = trainer.final_evaluation()?;
    let report_json = serde_json::to_string_pretty(&final_eval).expect("report serializes");
    fs::write(run_dir.join(FINAL_EVAL_FILE), report_json + "\n").map_err(io("writing final_eval.json"))?;
    let mut w = create(&run_dir.join(FINAL_TRACES_FILE))?;
    write_traces_jsonl(&mut w, &traces).map_err(io("writing final_eval_traces.jsonl"))?;
    w.flush().map_err(io("writing final_eval_traces.jsonl"))?;

    Ok(RunOutcome { run_dir, reports, final_eval, trainer })
}
