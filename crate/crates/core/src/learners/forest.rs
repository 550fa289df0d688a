//! Bagged CART ensembles.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, DecisionTree, TreeConfig, TreeTarget};
use crate::seed::derive_indexed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(d))` features per split.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::All => d,
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RandomForestConfig {
    fn default() -> Self {
        RandomForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestTask {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub task: ForestTask,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(x: ArrayView2<'_, f64>, target: TreeTarget<'_>, config: &RandomForestConfig) -> Self {
        let n = x.nrows();
        assert!(n > 0, "cannot fit a forest on zero rows");
        assert!(config.n_trees > 0, "a forest needs at least one tree");
        let tree_config = TreeConfig {
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
            max_features: Some(config.max_features.resolve(x.ncols())),
        };
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed(config.seed, t as u64));
                let samples: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_tree_on(x, target, &samples, &tree_config, &mut rng)
            })
            .collect();
        let task = match target {
            TreeTarget::Classes(_) => ForestTask::Classification,
            TreeTarget::Values(_) => ForestTask::Regression,
        };
        RandomForest { task, trees }
    }

    /// Majority vote of the trees; ties go to class 0.
    pub fn predict_class(&self, x: &[f64]) -> usize {
        let ones = self.trees.iter().filter(|t| t.predict_class(x) == 1).count();
        usize::from(2 * ones > self.trees.len())
    }

    /// Mean of the trees' leaf values.
    pub fn predict_value(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_value(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn sqrt_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(2), 2);
        assert_eq!(MaxFeatures::Sqrt.resolve(3), 2);
        assert_eq!(MaxFeatures::Sqrt.resolve(10), 4);
    }

    #[test]
    fn one_row_one_tree() {
        let x = array![[0.3, -0.2]];
        let cfg = RandomForestConfig {
            n_trees: 1,
            ..Default::default()
        };
        let f = RandomForest::fit(x.view(), TreeTarget::Classes(&[1]), &cfg);
        for q in [[0.0, 0.0], [1e6, -1e6], [-3.0, 2.0]] {
            assert_eq!(f.predict_class(&q), 1);
        }
    }

    #[test]
    fn vote_ties_go_to_class_zero() {
        let x = array![[0.0], [1.0]];
        let zero = RandomForest::fit(x.view(), TreeTarget::Classes(&[0, 0]), &RandomForestConfig { n_trees: 1, ..Default::default() });
        let one = RandomForest::fit(x.view(), TreeTarget::Classes(&[1, 1]), &RandomForestConfig { n_trees: 1, ..Default::default() });
        let tied = RandomForest {
            task: ForestTask::Classification,
            trees: vec![zero.trees[0].clone(), one.trees[0].clone()],
        };
        assert_eq!(tied.predict_class(&[0.5]), 0);
    }

    #[test]
    fn seeded_forest_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_simple_fn((60, 2), || StandardNormal.sample(&mut rng));
        let y: Vec<usize> = x.rows().into_iter().map(|r| usize::from(r[0] + r[1] > 0.0)).collect();
        let cfg = RandomForestConfig {
            n_trees: 20,
            seed: 99,
            ..Default::default()
        };
        let a = RandomForest::fit(x.view(), TreeTarget::Classes(&y), &cfg);
        let b = RandomForest::fit(x.view(), TreeTarget::Classes(&y), &cfg);
        assert_eq!(a, b);
        let c = RandomForest::fit(x.view(), TreeTarget::Classes(&y), &RandomForestConfig { seed: 100, ..cfg });
        assert_ne!(a, c);
    }
}
