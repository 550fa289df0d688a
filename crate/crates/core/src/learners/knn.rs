//! k-nearest-neighbour majority vote.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub points: Array2<f64>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[usize], config: &KnnConfig) -> Self {
        KnnModel {
            k: config.k,
            points: x.to_owned(),
            labels: labels.to_vec(),
        }
    }

    /// Indices of the `k` nearest training rows, nearest first; equal
    /// distances are ordered by row index.
    pub fn neighbors(&self, x: ArrayView1<'_, f64>) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .points
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Majority among the neighbours; a tied vote takes the nearest
    /// neighbour's class.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> usize {
        let nn = self.neighbors(x);
        let ones = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        let zeros = nn.len() - ones;
        match ones.cmp(&zeros) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => self.labels[nn[0]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k1_recovers_training_labels() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0]];
        let y = [0, 1, 1, 0];
        let m = KnnModel::fit(x.view(), &y, &KnnConfig { k: 1 });
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(m.predict(row), y[i]);
        }
    }

    #[test]
    fn k_equal_n_is_global_majority() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0], [9.0, 9.0]];
        let y = [1, 0, 1, 0, 1];
        let m = KnnModel::fit(x.view(), &y, &KnnConfig { k: 5 });
        for q in [[0.0, 0.0], [3.0, 3.0], [-50.0, 20.0]] {
            assert_eq!(m.predict(ArrayView1::from(&q)), 1);
        }
    }

    #[test]
    fn tied_vote_uses_nearest() {
        let x = array![[0.0, 0.0], [2.0, 0.0]];
        let m = KnnModel::fit(x.view(), &[1, 0], &KnnConfig { k: 2 });
        assert_eq!(m.predict(array![0.5, 0.0].view()), 1);
        assert_eq!(m.predict(array![1.5, 0.0].view()), 0);
        // equidistant: lower index is "nearest"
        assert_eq!(m.predict(array![1.0, 0.0].view()), 1);
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let x = Array2::from_shape_simple_fn((100, 2), || rng.random_range(-5.0..5.0));
        let y: Vec<usize> = (0..100).map(|_| rng.random_range(0..2)).collect();
        let m = KnnModel::fit(x.view(), &y, &KnnConfig { k: 5 });
        for _ in 0..50 {
            let q = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            // oracle: full sort of every distance
            let mut all: Vec<(f64, usize)> = (0..100)
                .map(|i| ((x[[i, 0]] - q[0]).powi(2) + (x[[i, 1]] - q[1]).powi(2), i))
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let top: Vec<usize> = all[..5].iter().map(|p| p.1).collect();
            assert_eq!(m.neighbors(ArrayView1::from(&q)), top);
            let ones = top.iter().filter(|&&i| y[i] == 1).count();
            assert_eq!(m.predict(ArrayView1::from(&q)), usize::from(ones >= 3));
        }
    }
}
