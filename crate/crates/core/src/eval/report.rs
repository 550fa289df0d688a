use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::cv::cross_validate;
use super::metrics::{compute_metrics, ConfusionMatrix};
use super::scenario::{encode_scenario, Scenario};
use super::split::holdout_split;
use crate::error::{Error, Result};
use crate::ingest::ChirpRecord;
use crate::learners::{ClassifierConfigs, ClassifierKind, LabeledPoints, TrainedModel};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub scenarios: Vec<Scenario>,
    pub classifiers: Vec<ClassifierKind>,
    pub configs: ClassifierConfigs,
    pub k_folds: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            scenarios: Scenario::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            configs: ClassifierConfigs::default(),
            k_folds: 5,
            holdout_fraction: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cv_accuracy_mean: f64,
    pub cv_accuracy_sd: f64,
    pub fold_accuracies: Vec<f64>,
    pub fold_confusion: Vec<ConfusionMatrix>,
    pub holdout: HoldoutReport,
    /// Seed handed to seeded learners (the forest); unused by the others.
    pub model_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub positives: usize,
    pub negatives: usize,
    pub fold_seed: u64,
    pub holdout_seed: u64,
    pub folds: Vec<Vec<usize>>,
    pub holdout_test: Vec<usize>,
    /// Keyed by classifier short name.
    pub classifiers: BTreeMap<String, CellReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub k_folds: usize,
    pub holdout_fraction: f64,
    pub configs: ClassifierConfigs,
    /// Conventions behind the reported numbers.
    pub conventions: BTreeMap<String, String>,
    /// Keyed by scenario id.
    pub scenarios: BTreeMap<String, ScenarioReport>,
    #[serde(default)]
    pub provenance: Option<serde_json::Value>,
}

impl EvalReport {
    pub fn cell(&self, scenario: Scenario, kind: ClassifierKind) -> Option<&CellReport> {
        self.scenarios.get(scenario.id())?.classifiers.get(kind.short())
    }
}

/// Model fitted on the hold-out training rows, kept for boundary figures.
#[derive(Debug, Clone)]
pub struct FittedCell {
    pub scenario: Scenario,
    pub model: TrainedModel,
}

fn conventions() -> BTreeMap<String, String> {
    [
        ("cv_accuracy_sd", "population standard deviation over fold accuracies"),
        ("holdout", "precision, recall and F1 come from the stratified hold-out split"),
        ("positive_class", "label 1 = the scenario's positive rule"),
        ("embedding", "coordinates were embedded before splitting"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Cross-validates and hold-out-scores every requested classifier on every
/// requested scenario.
pub fn run_all_scenarios(
    coords: ArrayView2<'_, f64>,
    records: &[ChirpRecord],
    settings: &EvalSettings,
) -> Result<(EvalReport, Vec<FittedCell>)> {
    if coords.nrows() != records.len() || coords.ncols() != 2 {
        return Err(Error::InvalidInput(format!(
            "embedding is {}x{} but there are {} records",
            coords.nrows(),
            coords.ncols(),
            records.len()
        )));
    }
    let mut scenarios = BTreeMap::new();
    let mut fitted = Vec::new();
    for &scenario in &settings.scenarios {
        let encoded = encode_scenario(records, scenario);
        let data = LabeledPoints::new(coords.to_owned(), encoded.labels)?;
        let fold_seed = derive_seed(settings.seed, &format!("folds/{}", scenario.id()));
        let holdout_seed = derive_seed(settings.seed, &format!("holdout/{}", scenario.id()));
        let (train, test) = holdout_split(&data.labels, settings.holdout_fraction, holdout_seed)?;
        let train_data = data.select(&train);
        let test_data = data.select(&test);

        let mut classifiers = BTreeMap::new();
        let mut folds = Vec::new();
        for &kind in &settings.classifiers {
            let model_seed = derive_seed(settings.seed, &format!("model/{}/{}", scenario.id(), kind.short()));
            let config = settings.configs.for_kind(kind).with_seed(model_seed);
            let cv = cross_validate(&data, &config, settings.k_folds, fold_seed)?;
            let model = TrainedModel::fit(&config, &train_data)?;
            let predicted = model.predict(test_data.coords.view());
            let confusion = ConfusionMatrix::from_predictions(&test_data.labels, &predicted);
            let m = compute_metrics(&confusion)?;
            folds = cv.folds.clone();
            classifiers.insert(
                kind.short().to_string(),
                CellReport {
                    cv_accuracy_mean: cv.mean_accuracy,
                    cv_accuracy_sd: cv.sd_accuracy,
                    fold_accuracies: cv.fold_accuracies,
                    fold_confusion: cv.fold_confusion,
                    holdout: HoldoutReport {
                        accuracy: m.accuracy,
                        precision: m.precision,
                        recall: m.recall,
                        f1: m.f1,
                        confusion,
                    },
                    model_seed,
                },
            );
            fitted.push(FittedCell { scenario, model });
        }
        scenarios.insert(
            scenario.id().to_string(),
            ScenarioReport {
                positives: encoded.positives,
                negatives: encoded.negatives,
                fold_seed,
                holdout_seed,
                folds,
                holdout_test: test,
                classifiers,
            },
        );
    }
    Ok((
        EvalReport {
            seed: settings.seed,
            k_folds: settings.k_folds,
            holdout_fraction: settings.holdout_fraction,
            configs: settings.configs.clone(),
            conventions: conventions(),
            scenarios,
            provenance: None,
        },
        fitted,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Outcome;
    use crate::learners::RandomForestConfig;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clustered(n_per: usize) -> (Array2<f64>, Vec<ChirpRecord>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut coords = Array2::zeros((3 * n_per, 2));
        let mut recs = Vec::new();
        let centers = [[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]];
        for c in 0..3 {
            for k in 0..n_per {
                let i = c * n_per + k;
                coords[[i, 0]] = centers[c][0] + rng.random_range(-2.0..2.0);
                coords[[i, 1]] = centers[c][1] + rng.random_range(-2.0..2.0);
                let (outcome, difficulty) = match c {
                    0 => (Outcome::S, 1 + (k % 2) as u8),
                    1 => (Outcome::NR, 3 + (k % 2) as u8),
                    _ => (Outcome::F, 1 + (k % 4) as u8),
                };
                recs.push(ChirpRecord {
                    id: i.to_string(),
                    temporal_duration: 1.0,
                    frequency_onset: 1.0,
                    spectral_duration: 1.0,
                    outcome,
                    difficulty,
                });
            }
        }
        (coords, recs)
    }

    #[test]
    fn full_matrix_is_deterministic() {
        let (coords, recs) = clustered(20);
        let settings = EvalSettings {
            configs: ClassifierConfigs {
                random_forest: RandomForestConfig {
                    n_trees: 10,
                    ..Default::default()
                },
                ..Default::default()
            },
            seed: 5,
            ..Default::default()
        };
        let (a, models) = run_all_scenarios(coords.view(), &recs, &settings).unwrap();
        let (b, _) = run_all_scenarios(coords.view(), &recs, &settings).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(models.len(), 12);
        assert_eq!(a.scenarios.len(), 3);
        for s in a.scenarios.values() {
            assert_eq!(s.classifiers.len(), 4);
            for cell in s.classifiers.values() {
                for v in [cell.cv_accuracy_mean, cell.cv_accuracy_sd, cell.holdout.precision, cell.holdout.recall, cell.holdout.f1] {
                    assert!((0.0..=1.0).contains(&v));
                }
                let cm = cell.holdout.confusion;
                assert_eq!(cm.total(), s.holdout_test.len());
                assert!((cell.holdout.accuracy - (cm.tp + cm.tn) as f64 / cm.total() as f64).abs() < 1e-15);
            }
        }
        // S1 is cluster-aligned, so every classifier separates it
        let s1 = a.cell(Scenario::S1Outcome, ClassifierKind::Knn).unwrap();
        assert_eq!(s1.cv_accuracy_mean, 1.0);
    }

    #[test]
    fn misaligned_rows_are_rejected() {
        let (coords, recs) = clustered(5);
        assert!(run_all_scenarios(coords.view(), &recs[1..], &EvalSettings::default()).is_err());
    }
}
