use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{leaf_scalar, DecisionTree, Node, RandomForest};

const MAX_FEATURES: usize = 16;

/// Expected tree output when only the features in `known` (bit mask) are
/// fixed to `x`; splits on other features average both children weighted by
/// their training sample counts.
pub fn subset_value(tree: &DecisionTree, x: &[f64], known: u32) -> f64 {
    fn go(tree: &DecisionTree, at: usize, x: &[f64], known: u32) -> f64 {
        match &tree.nodes[at] {
            Node::Leaf { value, .. } => leaf_scalar(value),
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if known & (1 << feature) != 0 {
                    let next = if x[*feature] <= *threshold { *left } else { *right };
                    go(tree, next, x, known)
                } else {
                    let nl = tree.nodes[*left].n_samples() as f64;
                    let nr = tree.nodes[*right].n_samples() as f64;
                    let total = nl + nr;
                    (nl * go(tree, *left, x, known) + nr * go(tree, *right, x, known)) / total
                }
            }
        }
    }
    go(tree, 0, x, known)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact Shapley values of one tree at `x`, plus the empty-set value (the
/// base) and the full-set value (the prediction).
pub fn tree_shapley(tree: &DecisionTree, x: &[f64]) -> (Vec<f64>, f64, f64) {
    let d = tree.n_features;
    assert!(d <= MAX_FEATURES, "subset enumeration over {d} features");
    let values: Vec<f64> = (0..1u32 << d).map(|mask| subset_value(tree, x, mask)).collect();
    let d_fact = factorial(d);
    let weights: Vec<f64> = (0..d)
        .map(|s| factorial(s) * factorial(d - s - 1) / d_fact)
        .collect();
    let mut phi = vec![0.0; d];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1u32 << j;
        for mask in 0..1u32 << d {
            if mask & bit == 0 {
                *p += weights[mask.count_ones() as usize] * (values[(mask | bit) as usize] - values[mask as usize]);
            }
        }
    }
    (phi, values[0], values[(1usize << d) - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyExplanation {
    pub phi: Vec<f64>,
    /// Mean over trees of the empty-coalition value.
    pub base: f64,
    pub prediction: f64,
}

/// Shapley values of a forest: the mean of its trees' values.
pub fn shapley_values(forest: &RandomForest, x: &[f64]) -> Result<ShapleyExplanation> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("instance has non-finite values".into()));
    }
    let d = forest.trees.first().map_or(0, |t| t.n_features);
    if x.len() != d {
        return Err(Error::InvalidInput(format!("instance has {} values, model expects {d}", x.len())));
    }
    let t = forest.trees.len() as f64;
    let mut phi = vec![0.0; d];
    let (mut base, mut prediction) = (0.0, 0.0);
    for tree in &forest.trees {
        let (p, b, v) = tree_shapley(tree, x);
        for (acc, pj) in phi.iter_mut().zip(p) {
            *acc += pj;
        }
        base += b;
        prediction += v;
    }
    phi.iter_mut().for_each(|p| *p /= t);
    Ok(ShapleyExplanation {
        phi,
        base: base / t,
        prediction: prediction / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{LeafValue, RandomForestConfig, TreeTarget};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stump(p_left: usize, p_right: usize, a: f64, b: f64, t: f64) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: t,
                    left: 1,
                    right: 2,
                    n_samples: p_left + p_right,
                },
                Node::Leaf { n_samples: p_left, value: LeafValue::Mean(a) },
                Node::Leaf { n_samples: p_right, value: LeafValue::Mean(b) },
            ],
            n_features: 3,
        }
    }

    #[test]
    fn stump_closed_form() {
        let (a, b) = (2.0, -1.0);
        let tree = stump(3, 1, a, b, 0.5);
        let p = 0.75;
        let (phi, base, pred) = tree_shapley(&tree, &[0.0, 9.0, -9.0]);
        assert!((phi[0] - (1.0 - p) * (a - b)).abs() < 1e-15);
        assert_eq!(&phi[1..], &[0.0, 0.0]);
        assert!((base - (p * a + (1.0 - p) * b)).abs() < 1e-15);
        assert_eq!(pred, a);
    }

    #[test]
    fn constant_model_has_zero_attributions() {
        let tree = DecisionTree {
            nodes: vec![Node::Leaf { n_samples: 4, value: LeafValue::Mean(3.0) }],
            n_features: 3,
        };
        let (phi, base, pred) = tree_shapley(&tree, &[1.0, 2.0, 3.0]);
        assert_eq!(phi, vec![0.0; 3]);
        assert_eq!((base, pred), (3.0, 3.0));
    }

    #[test]
    fn forest_efficiency_and_null_player() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Array2<f64> = Array2::from_shape_simple_fn((80, 3), || rng.random_range(-1.0..1.0));
        // feature 2 is constant, so no tree can split on it
        let mut x = x;
        x.column_mut(2).fill(0.5);
        let y: Vec<f64> = x.rows().into_iter().map(|r| r[0] * 2.0 + r[1].sin()).collect();
        let forest = RandomForest::fit(
            x.view(),
            TreeTarget::Values(&y),
            &RandomForestConfig { n_trees: 25, seed: 2, ..Default::default() },
        );
        for row in x.rows() {
            let inst = row.to_vec();
            let e = shapley_values(&forest, &inst).unwrap();
            let total: f64 = e.phi.iter().sum::<f64>() + e.base;
            assert!((total - forest.predict_value(&inst)).abs() < 1e-9);
            assert_eq!(e.phi[2], 0.0);
        }
        assert!(shapley_values(&forest, &[f64::NAN, 0.0, 0.0]).is_err());
        assert!(shapley_values(&forest, &[0.0, 0.0]).is_err());
    }

    fn permutations(d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(d - 1) {
            for at in 0..=p.len() {
                let mut q = p.clone();
                q.insert(at, d - 1);
                out.push(q);
            }
        }
        out
    }

    /// Average marginal contribution over every feature ordering.
    fn by_orderings(tree: &DecisionTree, x: &[f64]) -> Vec<f64> {
        let perms = permutations(tree.n_features);
        let mut phi = vec![0.0; tree.n_features];
        for order in &perms {
            let mut known = 0u32;
            for &j in order {
                let before = subset_value(tree, x, known);
                known |= 1 << j;
                phi[j] += subset_value(tree, x, known) - before;
            }
        }
        phi.iter().map(|p| p / perms.len() as f64).collect()
    }

    #[test]
    fn matches_ordering_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Array2<f64> = Array2::from_shape_simple_fn((60, 3), || rng.random_range(-1.0..1.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| r[0] * r[1] + r[2]).collect();
        let forest = RandomForest::fit(
            x.view(),
            TreeTarget::Values(&y),
            &RandomForestConfig { n_trees: 10, seed: 9, ..Default::default() },
        );
        for tree in &forest.trees {
            for row in x.rows().into_iter().take(20) {
                let inst = row.to_vec();
                let (phi, _, _) = tree_shapley(tree, &inst);
                let oracle = by_orderings(tree, &inst);
                for (a, b) in phi.iter().zip(&oracle) {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn duplicate_features_share_credit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut x: Array2<f64> = Array2::from_shape_simple_fn((50, 3), || rng.random_range(-1.0..1.0));
        for i in 0..50 {
            x[[i, 1]] = x[[i, 0]];
        }
        let y: Vec<f64> = x.rows().into_iter().map(|r| 3.0 * r[0] + 0.2 * r[2]).collect();
        let forest = RandomForest::fit(
            x.view(),
            TreeTarget::Values(&y),
            &RandomForestConfig { n_trees: 200, seed: 1, ..Default::default() },
        );
        // A single path-dependent tree is not symmetric in the two copies,
        // so pair every tree with its mirror image to get a symmetric value
        // function over the ensemble.
        let mut trees = forest.trees.clone();
        for t in &forest.trees {
            let mut m = t.clone();
            for node in &mut m.nodes {
                if let Node::Split { feature, .. } = node {
                    *feature = match *feature { 0 => 1, 1 => 0, f => f };
                }
            }
            trees.push(m);
        }
        let sym = RandomForest { task: forest.task, trees };
        for row in x.rows() {
            let e = shapley_values(&sym, &row.to_vec()).unwrap();
            assert!((e.phi[0] - e.phi[1]).abs() < 1e-9, "{:?}", e.phi);
        }
    }
}
