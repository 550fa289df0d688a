//! Fits the four classifiers on two Gaussian blobs in the plane and scores
//! them on a stratified hold-out split.

use chirp_atlas::eval::{compute_metrics, holdout_split, ConfusionMatrix};
use chirp_atlas::learners::{ClassifierConfigs, ClassifierKind, LabeledPoints, TrainedModel};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> chirp_atlas::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 300;
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let coords = Array2::from_shape_fn((n, 2), |(i, k)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        if k == 0 { z + 1.5 * (2.0 * labels[i] as f64 - 1.0) } else { z }
    });
    let data = LabeledPoints::new(coords, labels)?;
    let (train, test) = holdout_split(&data.labels, 0.3, 11)?;
    let (train, test) = (data.select(&train), data.select(&test));

    let configs = ClassifierConfigs::default();
    for kind in ClassifierKind::ALL {
        let model = TrainedModel::fit(&configs.for_kind(kind).with_seed(5), &train)?;
        let predicted = model.predict(test.coords.view());
        let m = compute_metrics(&ConfusionMatrix::from_predictions(&test.labels, &predicted))?;
        let json = model.to_json()?;
        assert_eq!(TrainedModel::from_json(&json)?, model);
        println!(
            "{:<20} accuracy {:.3}  precision {:.3}  recall {:.3}  F1 {:.3}  ({} bytes as JSON)",
            kind.label(),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            json.len()
        );
    }
    Ok(())
}
