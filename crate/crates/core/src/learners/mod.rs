//! Binary classifiers over 2-D embedding coordinates, plus the regression
//! forest reused by [`crate::explain`].

mod forest;
mod knn;
mod logistic;
mod model;
mod svm;
mod tree;

pub use forest::{ForestTask, MaxFeatures, RandomForest, RandomForestConfig};
pub use knn::{KnnConfig, KnnModel};
pub use logistic::{
    fit_logistic, penalized_gradient, penalized_log_likelihood, LogisticConfig, LogisticModel,
};
pub use model::{
    predict, ClassifierConfig, ClassifierConfigs, ClassifierKind, LabeledPoints, ModelParams,
    TrainedModel,
};
pub use svm::{default_gamma, fit_svm, Kernel, KernelKind, SvmConfig, SvmModel};
pub use tree::{fit_tree, gini_impurity, DecisionTree, LeafValue, Node, TreeConfig, TreeTarget};
pub(crate) use tree::leaf_scalar;
