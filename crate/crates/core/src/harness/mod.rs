//! Evaluation, ablations, statistics and figure-style data exports.

mod ablation;
mod analysis;
mod eval;
mod export;
mod stats;

pub use ablation::{compare, run_ablation, AblationOutcome, AblationSpec, Comparison};
pub use analysis::{
    act_distribution, bucket_of, bucket_range, master_activation, write_act_distribution_csv,
    write_master_activation_csv, AnalysisError, FrequencyMatrix, DEFAULT_BUCKETS,
};
pub use eval::{eval_specs, evaluate, EvalReport, ProfileStats};
pub use export::{export_figure, export_file_name, ExportError, EXPORT_DIR};
pub use stats::{difference_standard_error, welch_t_test, Summary, WelchTest};
pub use crate::training::Variant;
