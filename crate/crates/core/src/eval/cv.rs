use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ConfusionMatrix};
use super::split::stratified_kfold;
use crate::error::Result;
use crate::learners::{ClassifierConfig, LabeledPoints, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<Vec<usize>>,
    pub fold_accuracies: Vec<f64>,
    pub fold_confusion: Vec<ConfusionMatrix>,
    pub mean_accuracy: f64,
    /// Population standard deviation of the fold accuracies.
    pub sd_accuracy: f64,
}

/// Stratified k-fold cross-validation: each fold is scored by a model fitted
/// on the other `k - 1` folds.
pub fn cross_validate(data: &LabeledPoints, config: &ClassifierConfig, k: usize, seed: u64) -> Result<CvResult> {
    let folds = stratified_kfold(&data.labels, k, seed)?;
    let mut in_fold = vec![0usize; data.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_fold[i] = f;
        }
    }
    let mut fold_accuracies = Vec::with_capacity(k);
    let mut fold_confusion = Vec::with_capacity(k);
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..data.len()).filter(|&i| in_fold[i] != f).collect();
        let model = TrainedModel::fit(config, &data.select(&train))?;
        let test_data = data.select(test);
        let predicted = model.predict(test_data.coords.view());
        let cm = ConfusionMatrix::from_predictions(&test_data.labels, &predicted);
        fold_accuracies.push(compute_metrics(&cm)?.accuracy);
        fold_confusion.push(cm);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    let sd_accuracy = (fold_accuracies
        .iter()
        .map(|a| (a - mean_accuracy).powi(2))
        .sum::<f64>()
        / k as f64)
        .sqrt();
    Ok(CvResult {
        folds,
        fold_accuracies,
        fold_confusion,
        mean_accuracy,
        sd_accuracy,
    })
}
