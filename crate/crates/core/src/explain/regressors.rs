use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{RandomForest, RandomForestConfig, TreeTarget};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateRegressors {
    pub model_x: RandomForest,
    pub model_y: RandomForest,
    /// Training R² per coordinate.
    pub r2: [f64; 2],
    /// Coordinate was constant; its R² is 1 by convention.
    pub constant_target: [bool; 2],
}

fn r_squared(forest: &RandomForest, features: ArrayView2<'_, f64>, target: &[f64]) -> (f64, bool) {
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return (1.0, true);
    }
    let ss_res: f64 = features
        .rows()
        .into_iter()
        .zip(target)
        .map(|(row, t)| (t - forest.predict_value(&row.to_vec())).powi(2))
        .sum();
    (1.0 - ss_res / ss_tot, false)
}

/// Fits one regression forest per embedding coordinate.
pub fn fit_coordinate_regressors(
    features: ArrayView2<'_, f64>,
    coords: ArrayView2<'_, f64>,
    config: &RandomForestConfig,
) -> Result<CoordinateRegressors> {
    let n = features.nrows();
    if n != coords.nrows() || coords.ncols() != 2 {
        return Err(Error::InvalidInput(format!(
            "{} feature rows vs {}x{} coordinates",
            n,
            coords.nrows(),
            coords.ncols()
        )));
    }
    if n < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 rows, got {n}")));
    }
    let targets: [Vec<f64>; 2] = [coords.column(0).to_vec(), coords.column(1).to_vec()];
    let fit = |axis: usize, label: &str| {
        let cfg = RandomForestConfig {
            seed: derive_seed(config.seed, label),
            ..config.clone()
        };
        RandomForest::fit(features, TreeTarget::Values(&targets[axis]), &cfg)
    };
    let model_x = fit(0, "coordinate/x");
    let model_y = fit(1, "coordinate/y");
    let (r2x, cx) = r_squared(&model_x, features, &targets[0]);
    let (r2y, cy) = r_squared(&model_y, features, &targets[1]);
    Ok(CoordinateRegressors {
        model_x,
        model_y,
        r2: [r2x, r2y],
        constant_target: [cx, cy],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn features(n: usize) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        Array2::from_shape_simple_fn((n, 3), || rng.random_range(-2.0..2.0))
    }

    fn small() -> RandomForestConfig {
        RandomForestConfig {
            n_trees: 30,
            seed: 4,
            ..Default::default()
        }
    }

    #[test]
    fn constant_coordinate() {
        let x = features(40);
        let mut coords = Array2::zeros((40, 2));
        for i in 0..40 {
            coords[[i, 1]] = x[[i, 0]];
            coords[[i, 0]] = 2.5;
        }
        let r = fit_coordinate_regressors(x.view(), coords.view(), &small()).unwrap();
        assert!(r.constant_target[0] && !r.constant_target[1]);
        assert_eq!(r.r2[0], 1.0);
        for row in x.rows() {
            assert_eq!(r.model_x.predict_value(&row.to_vec()), 2.5);
        }
    }

    #[test]
    fn coordinate_equal_to_feature_fits_well() {
        let x = features(120);
        let mut coords = Array2::zeros((120, 2));
        for i in 0..120 {
            coords[[i, 0]] = x[[i, 1]];
            coords[[i, 1]] = x[[i, 2]];
        }
        let r = fit_coordinate_regressors(x.view(), coords.view(), &small()).unwrap();
        assert!(r.r2[0] >= 0.99 && r.r2[1] >= 0.99, "{:?}", r.r2);
        let again = fit_coordinate_regressors(x.view(), coords.view(), &small()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn needs_ten_rows() {
        let x = features(9);
        let coords = Array2::zeros((9, 2));
        assert!(fit_coordinate_regressors(x.view(), coords.view(), &small()).is_err());
    }
}
