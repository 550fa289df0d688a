//! CART decision trees: Gini splits for classification, variance splits for
//! regression.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `1 - Σ (n_c / n)²`.
pub fn gini_impurity(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    assert!(n > 0, "gini_impurity of an empty node");
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// What a tree is fitted against.
#[derive(Debug, Clone, Copy)]
pub enum TreeTarget<'a> {
    /// Binary class labels in {0, 1}.
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

impl TreeTarget<'_> {
    fn len(&self) -> usize {
        match self {
            TreeTarget::Classes(c) => c.len(),
            TreeTarget::Values(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeafValue {
    /// Per-class sample counts.
    Counts([usize; 2]),
    Mean(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
    },
    Leaf {
        n_samples: usize,
        value: LeafValue,
    },
}

impl Node {
    pub fn n_samples(&self) -> usize {
        match self {
            Node::Split { n_samples, .. } | Node::Leaf { n_samples, .. } => *n_samples,
        }
    }
}

/// Arena-allocated binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

impl DecisionTree {
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return at,
            }
        }
    }

    /// Majority class of the reached leaf; ties go to class 0.
    pub fn predict_class(&self, x: &[f64]) -> usize {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf {
                value: LeafValue::Counts(c),
                ..
            } => usize::from(c[1] > c[0]),
            Node::Leaf {
                value: LeafValue::Mean(m),
                ..
            } => usize::from(*m > 0.5),
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Leaf mean for regression trees, class-1 fraction for classifiers.
    pub fn predict_value(&self, x: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value, .. } => leaf_scalar(value),
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }
}

pub(crate) fn leaf_scalar(value: &LeafValue) -> f64 {
    match value {
        LeafValue::Counts(c) => c[1] as f64 / (c[0] + c[1]).max(1) as f64,
        LeafValue::Mean(m) => *m,
    }
}

/// Fits a tree on every row of `x`.
pub fn fit_tree(x: ArrayView2<'_, f64>, target: TreeTarget<'_>, config: &TreeConfig, seed: u64) -> DecisionTree {
    let samples: Vec<usize> = (0..x.nrows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fit_tree_on(x, target, &samples, config, &mut rng)
}

/// Fits a tree on `samples`, a list of row indices that may repeat (bootstrap).
pub(crate) fn fit_tree_on(
    x: ArrayView2<'_, f64>,
    target: TreeTarget<'_>,
    samples: &[usize],
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    assert_eq!(x.nrows(), target.len(), "feature rows and targets differ in length");
    assert!(!samples.is_empty(), "cannot fit a tree on zero samples");
    let mut builder = Builder {
        x,
        target,
        config,
        rng,
        nodes: Vec::new(),
    };
    builder.grow(samples.to_vec(), 0);
    DecisionTree {
        nodes: builder.nodes,
        n_features: x.ncols(),
    }
}

struct Builder<'a, 'r> {
    x: ArrayView2<'a, f64>,
    target: TreeTarget<'a>,
    config: &'a TreeConfig,
    rng: &'r mut ChaCha8Rng,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
}

impl Builder<'_, '_> {
    fn leaf_value(&self, idx: &[usize]) -> LeafValue {
        match self.target {
            TreeTarget::Classes(c) => {
                let mut counts = [0usize; 2];
                for &i in idx {
                    counts[c[i]] += 1;
                }
                LeafValue::Counts(counts)
            }
            TreeTarget::Values(v) => {
                LeafValue::Mean(idx.iter().map(|&i| v[i]).sum::<f64>() / idx.len() as f64)
            }
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match self.target {
            TreeTarget::Classes(c) => idx.iter().all(|&i| c[i] == c[idx[0]]),
            TreeTarget::Values(v) => idx.iter().all(|&i| v[i] == v[idx[0]]),
        }
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let n = idx.len();
        self.nodes.push(Node::Leaf {
            n_samples: n,
            value: self.leaf_value(&idx),
        });
        let stop = n < self.config.min_samples_split.max(2)
            || self.config.max_depth.is_some_and(|d| depth >= d)
            || self.is_pure(&idx);
        if stop {
            return at;
        }
        let Some(choice) = self.best_split(&idx) else {
            return at;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[[i, choice.feature]] <= choice.threshold);
        debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
            n_samples: n,
        };
        at
    }

    /// Examines `max_features` randomly chosen features; if none of them
    /// admits a threshold, keeps drawing from the rest.
    fn best_split(&mut self, idx: &[usize]) -> Option<SplitChoice> {
        let d = self.x.ncols();
        let mut features: Vec<usize> = (0..d).collect();
        let k = match self.config.max_features {
            Some(k) if k < d => {
                features.shuffle(self.rng);
                k.max(1)
            }
            _ => d,
        };

        let mut best: Option<(f64, SplitChoice)> = None;
        for (examined, &f) in features.iter().enumerate() {
            if examined >= k && best.is_some() {
                break;
            }
            if let Some((gain, threshold)) = self.best_threshold(idx, f) {
                if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                    best = Some((gain, SplitChoice { feature: f, threshold }));
                }
            }
        }
        best.map(|(_, c)| c)
    }

    /// Best (impurity decrease, threshold) over midpoints between consecutive
    /// distinct values of feature `f`.
    fn best_threshold(&self, idx: &[usize], f: usize) -> Option<(f64, f64)> {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
        let n = order.len();
        let nf = n as f64;
        let mut best: Option<(f64, f64)> = None;

        match self.target {
            TreeTarget::Classes(c) => {
                let mut total = [0usize; 2];
                for &i in &order {
                    total[c[i]] += 1;
                }
                let parent = gini_impurity(&total);
                let mut left = [0usize; 2];
                for t in 1..n {
                    left[c[order[t - 1]]] += 1;
                    let (a, b) = (self.x[[order[t - 1], f]], self.x[[order[t], f]]);
                    if a == b {
                        continue;
                    }
                    let right = [total[0] - left[0], total[1] - left[1]];
                    let child = (t as f64 * gini_impurity(&left)
                        + (n - t) as f64 * gini_impurity(&right))
                        / nf;
                    let gain = parent - child;
                    if best.is_none_or(|(g, _)| gain > g) {
                        best = Some((gain, midpoint(a, b)));
                    }
                }
            }
            TreeTarget::Values(v) => {
                let (sum, sumsq) = order
                    .iter()
                    .fold((0.0, 0.0), |(s, q), &i| (s + v[i], q + v[i] * v[i]));
                let parent = sumsq / nf - (sum / nf).powi(2);
                let (mut ls, mut lq) = (0.0, 0.0);
                for t in 1..n {
                    let y = v[order[t - 1]];
                    ls += y;
                    lq += y * y;
                    let (a, b) = (self.x[[order[t - 1], f]], self.x[[order[t], f]]);
                    if a == b {
                        continue;
                    }
                    let (nl, nr) = (t as f64, (n - t) as f64);
                    let (rs, rq) = (sum - ls, sumsq - lq);
                    let child = (lq - ls * ls / nl) / nf + (rq - rs * rs / nr) / nf;
                    let gain = parent - child;
                    if best.is_none_or(|(g, _)| gain > g) {
                        best = Some((gain, midpoint(a, b)));
                    }
                }
            }
        }
        best
    }
}

/// Midpoint of `a < b` that still separates them under `x <= t`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(&[4, 0]), 0.0);
        assert_eq!(gini_impurity(&[2, 2]), 0.5);
        assert_eq!(gini_impurity(&[1, 3]), 0.375);
    }

    #[test]
    fn one_split_separates_sign() {
        let x = array![[-3.0, 1.0], [-2.0, -1.0], [-0.5, 0.3], [0.5, 0.1], [1.0, -2.0], [4.0, 0.0]];
        let y = [0, 0, 0, 1, 1, 1];
        let tree = fit_tree(x.view(), TreeTarget::Classes(&y), &TreeConfig::default(), 0);
        assert_eq!(tree.depth(), 1);
        match &tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.0);
            }
            other => panic!("root is {other:?}"),
        }
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(tree.predict_class(row.as_slice().unwrap()), y[i]);
        }
    }

    #[test]
    fn identical_features_make_a_majority_leaf() {
        let x = Array2::from_elem((5, 2), 1.5);
        let y = [1, 0, 1, 1, 0];
        let tree = fit_tree(x.view(), TreeTarget::Classes(&y), &TreeConfig::default(), 0);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict_class(&[100.0, -4.0]), 1);
    }

    #[test]
    fn single_row_is_a_leaf() {
        let x = array![[1.0, 2.0]];
        let tree = fit_tree(x.view(), TreeTarget::Values(&[3.5]), &TreeConfig::default(), 0);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict_value(&[0.0, 0.0]), 3.5);
    }

    #[test]
    fn two_blobs_fit_the_training_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = Array2::zeros((200, 2));
        let mut y = vec![0; 200];
        for i in 0..200 {
            let c = i % 2;
            y[i] = c;
            for k in 0..2 {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[i, k]] = z + if c == 1 { 4.0 } else { 0.0 };
            }
        }
        let tree = fit_tree(x.view(), TreeTarget::Classes(&y), &TreeConfig::default(), 0);
        let correct = (0..200)
            .filter(|&i| tree.predict_class(x.row(i).as_slice().unwrap()) == y[i])
            .count();
        assert!(correct as f64 / 200.0 >= 0.99);
        check_structure(&tree, 200);
    }

    fn check_structure(tree: &DecisionTree, n: usize) {
        assert_eq!(tree.nodes[0].n_samples(), n);
        let mut reached = vec![false; tree.nodes.len()];
        let mut stack = vec![0];
        while let Some(at) = stack.pop() {
            reached[at] = true;
            match &tree.nodes[at] {
                Node::Split { left, right, n_samples, threshold, .. } => {
                    assert!(threshold.is_finite());
                    assert_eq!(tree.nodes[*left].n_samples() + tree.nodes[*right].n_samples(), *n_samples);
                    stack.extend([*left, *right]);
                }
                Node::Leaf { n_samples, value: LeafValue::Counts(c) } => {
                    assert_eq!(c[0] + c[1], *n_samples)
                }
                Node::Leaf { .. } => {}
            }
        }
        assert!(reached.iter().all(|r| *r));
    }

    #[test]
    fn regression_tree_respects_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_simple_fn((80, 3), || rng.random_range(-1.0..1.0));
        let v: Vec<f64> = x.rows().into_iter().map(|r| 3.0 * r[0] - r[2]).collect();
        let cfg = TreeConfig {
            max_depth: Some(3),
            max_features: Some(2),
            ..TreeConfig::default()
        };
        let tree = fit_tree(x.view(), TreeTarget::Values(&v), &cfg, 5);
        assert!(tree.depth() <= 3);
        assert_eq!(tree, fit_tree(x.view(), TreeTarget::Values(&v), &cfg, 5));
        check_structure(&tree, 80);
    }

    #[test]
    fn midpoint_of_adjacent_floats_still_separates() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a <= t && b > t);
    }
}
