use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{RandomForest, RandomForestConfig};
use super::knn::{KnnConfig, KnnModel};
use super::logistic::{fit_logistic, LogisticConfig, LogisticModel};
use super::svm::{fit_svm, SvmConfig, SvmModel};
use super::tree::TreeTarget;
use crate::error::{Error, Result};

/// Points with binary labels in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub coords: Array2<f64>,
    pub labels: Vec<usize>,
}

impl LabeledPoints {
    pub fn new(coords: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if coords.nrows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} labels",
                coords.nrows(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidInput(format!("label {l} is not binary")));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(LabeledPoints { coords, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn select(&self, rows: &[usize]) -> LabeledPoints {
        LabeledPoints {
            coords: self.coords.select(ndarray::Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    RandomForest,
    Svm,
    LogisticRegression,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::RandomForest,
        ClassifierKind::Svm,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Knn,
    ];

    /// Short name used in file names and on the command line.
    pub fn short(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::Svm => "svm",
            ClassifierKind::LogisticRegression => "logreg",
            ClassifierKind::Knn => "knn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::LogisticRegression => "Logistic Regression",
            ClassifierKind::Knn => "k-NN",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.short() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier `{s}`")))
    }
}

/// Hyperparameters for each classifier kind. Defaults are implementation
/// choices, not values taken from any clinical study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfigs {
    pub random_forest: RandomForestConfig,
    pub svm: SvmConfig,
    pub logistic_regression: LogisticConfig,
    pub knn: KnnConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum ClassifierConfig {
    RandomForest(RandomForestConfig),
    Svm(SvmConfig),
    LogisticRegression(LogisticConfig),
    Knn(KnnConfig),
}

impl ClassifierConfig {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierConfig::Svm(_) => ClassifierKind::Svm,
            ClassifierConfig::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ClassifierConfig::Knn(_) => ClassifierKind::Knn,
        }
    }

    /// Copy with the random-forest seed replaced; other kinds are unseeded.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            ClassifierConfig::RandomForest(c) => ClassifierConfig::RandomForest(RandomForestConfig {
                seed,
                ..c.clone()
            }),
            other => other.clone(),
        }
    }
}

impl ClassifierConfigs {
    pub fn for_kind(&self, kind: ClassifierKind) -> ClassifierConfig {
        match kind {
            ClassifierKind::RandomForest => ClassifierConfig::RandomForest(self.random_forest.clone()),
            ClassifierKind::Svm => ClassifierConfig::Svm(self.svm.clone()),
            ClassifierKind::LogisticRegression => {
                ClassifierConfig::LogisticRegression(self.logistic_regression.clone())
            }
            ClassifierKind::Knn => ClassifierConfig::Knn(self.knn.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "fitted", rename_all = "snake_case")]
pub enum ModelParams {
    RandomForest(RandomForest),
    Svm(SvmModel),
    LogisticRegression(LogisticModel),
    Knn(KnnModel),
}

/// A fitted classifier together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub config: ClassifierConfig,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn fit(config: &ClassifierConfig, data: &LabeledPoints) -> Result<Self> {
        let [zeros, ones] = data.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::InsufficientClass {
                class: usize::from(zeros > 0),
                count: 0,
                required: 1,
            });
        }
        let x = data.coords.view();
        let params = match config {
            ClassifierConfig::RandomForest(c) => {
                ModelParams::RandomForest(RandomForest::fit(x, TreeTarget::Classes(&data.labels), c))
            }
            ClassifierConfig::Svm(c) => ModelParams::Svm(fit_svm(x, &data.labels, c)),
            ClassifierConfig::LogisticRegression(c) => {
                ModelParams::LogisticRegression(fit_logistic(x, &data.labels, c))
            }
            ClassifierConfig::Knn(c) => {
                if c.k == 0 || c.k > data.len() {
                    return Err(Error::InvalidConfig(format!(
                        "k = {} must lie in 1..={}",
                        c.k,
                        data.len()
                    )));
                }
                ModelParams::Knn(KnnModel::fit(x, &data.labels, c))
            }
        };
        Ok(TrainedModel {
            kind: config.kind(),
            config: config.clone(),
            params,
        })
    }

    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> usize {
        match &self.params {
            ModelParams::RandomForest(f) => match x.as_slice() {
                Some(s) => f.predict_class(s),
                None => f.predict_class(&x.to_vec()),
            },
            ModelParams::Svm(m) => m.predict(x),
            ModelParams::LogisticRegression(m) => m.predict(x),
            ModelParams::Knn(m) => m.predict(x),
        }
    }

    /// Labels for every row of `points`, in order.
    pub fn predict(&self, points: ArrayView2<'_, f64>) -> Vec<usize> {
        (0..points.nrows())
            .into_par_iter()
            .map(|i| self.predict_one(points.row(i)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn predict(model: &TrainedModel, points: ArrayView2<'_, f64>) -> Vec<usize> {
    model.predict(points)
}
