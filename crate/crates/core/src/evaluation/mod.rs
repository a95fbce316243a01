//! Metric suite, hit rates, adverse-event ratios and the evaluation harness.

mod adverse;
mod harness;
mod hits;
mod metrics;
mod report;
mod roc;

pub use adverse::{adverse_ratios, AdverseRatios, RecommendationLogEntry};
pub use harness::{evaluate, holdout, run_evaluation, EvaluationConfig, EvaluationResult, Holdout};
pub use hits::{cumulative_hit_rate, hit_rate, TestSample, TopNLists};
pub use metrics::{binarize_and_count, f_beta, metrics, ClassificationMetrics, ConfusionMatrix};
pub use report::{AdverseAblation, MetricsReport, ModelReport, RocCurves, ThresholdValue};
pub use roc::{roc_auc, RocPoint};
