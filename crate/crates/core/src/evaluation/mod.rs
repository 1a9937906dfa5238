//! Metrics, robustness under augmentation, significance testing and
//! corpus-level experiment runs.

pub mod augment;
pub mod experiment;
pub mod metrics;
pub mod stats;

pub use augment::{
    augment, robustness_score, CorpusPredictor, Perturbation, RobustnessReport, WORD_DELETION_RATE,
};
pub use experiment::{
    default_ablations, render_ablation_table, render_report, run_cascade, sweep_csv,
    AblationResult, AblationSpec, CascadeRun, Experiment, PrimaryOnly, SweepRow,
};
pub use metrics::{evaluate, ClassMetrics, ClassificationMetrics, EvaluationReport};
pub use stats::{paired_t_test, student_t_cdf, two_sided_p, TTest};
