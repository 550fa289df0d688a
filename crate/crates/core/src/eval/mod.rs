//! Scenario labelings, stratified resampling and classification metrics.

mod cv;
mod metrics;
mod report;
mod scenario;
mod split;

pub use cv::{cross_validate, CvResult};
pub use metrics::{compute_metrics, ConfusionMatrix, Metrics};
pub use report::{
    run_all_scenarios, CellReport, EvalReport, EvalSettings, FittedCell, HoldoutReport,
    ScenarioReport,
};
pub use scenario::{encode_scenario, Scenario, ScenarioLabels};
pub use split::{holdout_split, stratified_kfold};
