use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

/// Student-t similarities over low-dimensional points.
#[derive(Debug, Clone)]
pub struct LowDimSimilarities {
    /// Normalized `q_ij`, zero diagonal, sums to 1.
    pub q: Array2<f64>,
    /// Unnormalized kernel `(1 + |y_i - y_j|²)^-1`, zero diagonal.
    pub weights: Array2<f64>,
    /// Sum of `weights`.
    pub z: f64,
}

/// Kernel matrix and its sum; the sum is reduced row by row in index order.
pub(crate) fn student_t_weights(y: ArrayView2<'_, f64>) -> (Array2<f64>, f64) {
    let n = y.nrows();
    let mut w = Array2::zeros((n, n));
    let row_sums: Vec<f64> = w
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            let yi = y.row(i);
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    let d2: f64 = yi
                        .iter()
                        .zip(y.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let k = 1.0 / (1.0 + d2);
                    row[j] = k;
                    s += k;
                }
            }
            s
        })
        .collect();
    (w, row_sums.iter().sum())
}

pub fn low_dim_similarities(y: ArrayView2<'_, f64>) -> LowDimSimilarities {
    let (weights, z) = student_t_weights(y);
    let q = &weights / z;
    LowDimSimilarities { q, weights, z }
}

/// `Σ_{i≠j} p_ij ln(p_ij / q_ij)`; pairs with `p_ij = 0` contribute nothing.
pub fn kl_divergence(p: ArrayView2<'_, f64>, q: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(p.dim(), q.dim(), "p and q must have matching shape");
    let n = p.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[[i, j]];
            if i != j && pij > 0.0 {
                total += pij * (pij / q[[i, j]]).ln();
            }
        }
    }
    total
}

/// KL of `p` against `weights / z` without materializing `q`.
pub(crate) fn kl_from_weights(p: ArrayView2<'_, f64>, weights: &Array2<f64>, z: f64) -> f64 {
    let n = p.nrows();
    let row_terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                let pij = p[[i, j]];
                if i != j && pij > 0.0 {
                    s += pij * (pij * z / weights[[i, j]]).ln();
                }
            }
            s
        })
        .collect();
    row_terms.iter().sum()
}

/// `4 Σ_j (scale·p_ij − q_ij)(y_i − y_j) w_ij` written into `grad`.
pub(crate) fn gradient_into(
    p: ArrayView2<'_, f64>,
    p_scale: f64,
    y: ArrayView2<'_, f64>,
    weights: &Array2<f64>,
    z: f64,
    grad: &mut Array2<f64>,
) {
    let n = y.nrows();
    let dims = y.ncols();
    grad.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut g)| {
            g.fill(0.0);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = weights[[i, j]];
                let mult = (p_scale * p[[i, j]] - w / z) * w;
                for k in 0..dims {
                    g[k] += mult * (y[[i, k]] - y[[j, k]]);
                }
            }
            g.mapv_inplace(|v| 4.0 * v);
        });
}

/// Gradient of the KL divergence with respect to every low-dimensional point.
pub fn kl_gradient(p: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Array2<f64> {
    let (weights, z) = student_t_weights(y);
    let mut grad = Array2::zeros(y.raw_dim());
    gradient_into(p, 1.0, y, &weights, z, &mut grad);
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{conditional_affinities, symmetrize};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(rng))
    }

    /// Independent pairwise evaluation, no shared helpers.
    fn brute_q(y: &Array2<f64>) -> Array2<f64> {
        let n = y.nrows();
        let mut q = Array2::zeros((n, n));
        let mut z = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let dx = y[[i, 0]] - y[[j, 0]];
                    let dy = y[[i, 1]] - y[[j, 1]];
                    q[[i, j]] = 1.0 / (1.0 + dx * dx + dy * dy);
                    z += q[[i, j]];
                }
            }
        }
        q / z
    }

    fn joint_p(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let x = normal(n, 3, rng);
        let c = conditional_affinities(x.view(), 3.0).unwrap();
        symmetrize(&c.p).unwrap().as_array().clone()
    }

    #[test]
    fn two_points_split_mass() {
        let s = low_dim_similarities(array![[0.0, 0.0], [7.0, -3.0]].view());
        assert_eq!(s.q[[0, 1]], 0.5);
        assert_eq!(s.q[[1, 0]], 0.5);
    }

    #[test]
    fn equilateral_triangle_is_uniform() {
        let h = 3f64.sqrt() / 2.0;
        let s = low_dim_similarities(array![[0.0, 0.0], [1.0, 0.0], [0.5, h]].view());
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((s.q[[i, j]] - 1.0 / 6.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn similarities_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = normal(4, 2, &mut rng);
        let s = low_dim_similarities(y.view());
        let oracle = brute_q(&y);
        for (a, b) in s.q.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = joint_p(6, &mut rng);
        assert!(kl_divergence(p.view(), p.view()).abs() < 1e-15);

        // single pair mass 1 against uniform over M = n(n-1) pairs
        let n = 5;
        let mut single = Array2::zeros((n, n));
        single[[1, 3]] = 1.0;
        let m = (n * (n - 1)) as f64;
        let mut uniform = Array2::from_elem((n, n), 1.0 / m);
        for i in 0..n {
            uniform[[i, i]] = 0.0;
        }
        assert!((kl_divergence(single.view(), uniform.view()) - m.ln()).abs() < 1e-12);
    }

    #[test]
    fn kl_matches_term_by_term_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = joint_p(6, &mut rng);
        let y = normal(6, 2, &mut rng);
        let q = brute_q(&y);
        let mut oracle = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    oracle += p[[i, j]] * (p[[i, j]].ln() - q[[i, j]].ln());
                }
            }
        }
        let s = low_dim_similarities(y.view());
        assert!((kl_divergence(p.view(), s.q.view()) - oracle).abs() < 1e-12);
        assert!((kl_from_weights(p.view(), &s.weights, s.z) - oracle).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_when_p_equals_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = normal(7, 2, &mut rng);
        let q = low_dim_similarities(y.view()).q;
        let g = kl_gradient(q.view(), y.view());
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gradient_sums_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = joint_p(9, &mut rng);
        let y = normal(9, 2, &mut rng);
        let g = kl_gradient(p.view(), y.view());
        for k in 0..2 {
            assert!(g.column(k).sum().abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = joint_p(8, &mut rng);
        let y = normal(8, 2, &mut rng);
        let g = kl_gradient(p.view(), y.view());
        let h = 1e-5;
        for i in 0..8 {
            for k in 0..2 {
                let mut plus = y.clone();
                plus[[i, k]] += h;
                let mut minus = y.clone();
                minus[[i, k]] -= h;
                let fd = (kl_divergence(p.view(), brute_q(&plus).view())
                    - kl_divergence(p.view(), brute_q(&minus).view()))
                    / (2.0 * h);
                let rel = (g[[i, k]] - fd).abs() / g[[i, k]].abs().max(fd.abs());
                assert!(rel < 1e-5, "({i},{k}) analytic {} fd {fd}", g[[i, k]]);
            }
        }
    }

    #[test]
    fn rigid_motion_preserves_kl() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = joint_p(10, &mut rng);
        let y = normal(10, 2, &mut rng);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        let (tx, ty): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let mut moved = y.clone();
        for mut r in moved.rows_mut() {
            let (a, b) = (r[0], r[1]);
            r[0] = c * a - s * b + tx;
            r[1] = s * a + c * b + ty;
        }
        let before = kl_divergence(p.view(), low_dim_similarities(y.view()).q.view());
        let after = kl_divergence(p.view(), low_dim_similarities(moved.view()).q.view());
        assert!((before - after).abs() < 1e-9);
    }
}
