//! Feature-sensitivity maps over the embedding.
//!
//! Two regression forests learn each embedding coordinate from the original
//! features. Every prediction is then attributed to the features with exact
//! Shapley values: all feature subsets are enumerated and the value of a
//! subset is the tree's expectation when only that subset is known, with
//! unknown features integrated out along both branches in proportion to the
//! training samples that went each way.

mod regressors;
mod sensitivity;
mod shapley;

pub use regressors::{fit_coordinate_regressors, CoordinateRegressors};
pub use sensitivity::{
    build_sensitivity_map, read_sensitivity, sensitivity_summary, write_sensitivity, CombineRule, FeatureSummary,
    SensitivityMap, SensitivitySidecar,
};
pub use shapley::{shapley_values, subset_value, tree_shapley, ShapleyExplanation};
