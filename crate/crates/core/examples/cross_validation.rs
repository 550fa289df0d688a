//! Embeds a synthetic dataset and evaluates every classifier on every
//! scenario with 5-fold stratified cross-validation plus a 30% hold-out.

use chirp_atlas::cli::{synthesize, LabelModel, SynthConfig};
use chirp_atlas::embed::{run_tsne, TsneConfig};
use chirp_atlas::eval::{run_all_scenarios, EvalSettings, Scenario};
use chirp_atlas::ingest::{standardize, FeatureMatrix};
use chirp_atlas::learners::{ClassifierConfigs, ClassifierKind};

fn main() -> chirp_atlas::Result<()> {
    let synth = SynthConfig {
        n_per_cluster: 60,
        n_clusters: 6,
        separation: 4.0,
        labels: LabelModel::ClusterAligned,
    };
    let records = synthesize(&synth, 8)?;
    let x = standardize(&FeatureMatrix::from_records(&records))?;
    let embedding = run_tsne(&x, &TsneConfig { seed: 8, ..TsneConfig::default() })?;

    let settings = EvalSettings {
        scenarios: Scenario::ALL.to_vec(),
        classifiers: ClassifierKind::ALL.to_vec(),
        configs: ClassifierConfigs::default(),
        k_folds: 5,
        holdout_fraction: 0.3,
        seed: 8,
    };
    let (report, _) = run_all_scenarios(embedding.coords.view(), &records, &settings)?;
    for (scenario, sc) in &report.scenarios {
        println!("{scenario}: {} positive / {} negative", sc.positives, sc.negatives);
        for (clf, cell) in &sc.classifiers {
            println!(
                "  {clf:<7} CV {:.1}% ± {:.1}%   hold-out P {:.3} R {:.3} F1 {:.3}",
                100.0 * cell.cv_accuracy_mean,
                100.0 * cell.cv_accuracy_sd,
                cell.holdout.precision,
                cell.holdout.recall,
                cell.holdout.f1
            );
        }
    }
    Ok(())
}
