use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const INIT_SD: f64 = 1e-4;

/// Principal directions of a centered data matrix, largest variance first.
#[derive(Debug, Clone)]
pub struct PrincipalAxes {
    pub mean: Vec<f64>,
    /// One unit vector per component, sign-fixed so the first nonzero
    /// loading is positive.
    pub components: Vec<Vec<f64>>,
    /// Population variance along each component.
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PcaInit {
    pub coords: Array2<f64>,
    /// True when the data had fewer than two nonzero principal directions and
    /// seeded Gaussian noise was used instead.
    pub fallback: bool,
}

pub fn principal_axes(x: ArrayView2<'_, f64>) -> PrincipalAxes {
    let (n, d) = x.dim();
    let mean: Vec<f64> = (0..d).map(|k| x.column(k).sum() / n as f64).collect();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in x.rows() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[(a, b)] /= n as f64;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(d);
    let mut variances = Vec::with_capacity(d);
    for k in order {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        components.push(v);
        variances.push(eig.eigenvalues[k].max(0.0));
    }
    PrincipalAxes {
        mean,
        components,
        variances,
    }
}

/// Projects onto the top two principal components and rescales each output
/// column to standard deviation 1e-4. The seed is only consumed by the noise
/// fallback for rank-deficient input.
pub fn pca_init(x: ArrayView2<'_, f64>, seed: u64) -> Result<PcaInit> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::InvalidInput(format!("pca_init needs at least 3 rows, got {n}")));
    }
    let axes = principal_axes(x);
    let top = axes.variances.first().copied().unwrap_or(0.0);
    let rank_ok = axes.variances.len() >= 2 && top > 0.0 && axes.variances[1] > 1e-12 * top;
    if !rank_ok {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = Array2::from_shape_simple_fn((n, 2), || {
            INIT_SD * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        return Ok(PcaInit {
            coords,
            fallback: true,
        });
    }

    let mut coords = Array2::zeros((n, 2));
    for (i, row) in x.rows().into_iter().enumerate() {
        for c in 0..2 {
            coords[[i, c]] = row
                .iter()
                .zip(&axes.mean)
                .zip(&axes.components[c])
                .map(|((v, m), w)| (v - m) * w)
                .sum();
        }
    }
    for mut col in coords.columns_mut() {
        let mean = col.sum() / n as f64;
        let sd = (col.iter().map(|v: &f64| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        col.mapv_inplace(|v| v * INIT_SD / sd);
    }
    Ok(PcaInit {
        coords,
        fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn axis_aligned_2d_is_rescaled_identity() {
        let x = array![[-3.0, 0.5], [0.0, -1.0], [3.0, 0.5], [1.0, 0.0], [-1.0, 0.0]];
        let init = pca_init(x.view(), 1).unwrap();
        assert!(!init.fallback);
        for c in 0..2 {
            let col = x.column(c);
            let mean = col.mean().unwrap();
            let sd = (col.mapv(|v| (v - mean).powi(2)).mean().unwrap()).sqrt();
            for i in 0..x.nrows() {
                let expected = (x[[i, c]] - mean) / sd * INIT_SD;
                let got = init.coords[[i, c]];
                // proportional up to sign
                assert!((got.abs() - expected.abs()).abs() < 1e-12 * INIT_SD, "{i},{c}");
            }
            let ratio: Vec<f64> = (0..x.nrows())
                .filter(|&i| x[[i, c]] - mean != 0.0)
                .map(|i| init.coords[[i, c]] / (x[[i, c]] - mean))
                .collect();
            assert!(ratio.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12 * w[0].abs()));
        }
    }

    #[test]
    fn line_in_3d_falls_back() {
        let x = Array2::from_shape_fn((10, 3), |(i, k)| i as f64 * [1.0, 2.0, -0.5][k]);
        let init = pca_init(x.view(), 3).unwrap();
        assert!(init.fallback);
        assert_eq!(init.coords.dim(), (10, 2));
        assert_eq!(init.coords, pca_init(x.view(), 3).unwrap().coords);
    }

    #[test]
    fn output_sd_is_1e4() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Array2::from_shape_simple_fn((30, 3), || rng.random_range(-1.0..1.0));
        let init = pca_init(x.view(), 0).unwrap();
        for col in init.coords.columns() {
            let mean = col.mean().unwrap();
            let sd = (col.mapv(|v| (v - mean).powi(2)).mean().unwrap()).sqrt();
            assert!((sd - 1e-4).abs() < 1e-16);
            assert!(mean.abs() < 1e-18);
        }
    }

    /// Variance captured by an orthonormal pair of directions.
    fn captured(x: &Array2<f64>, a: &[f64], b: &[f64]) -> f64 {
        let n = x.nrows() as f64;
        let mean: Vec<f64> = (0..3).map(|k| x.column(k).sum() / n).collect();
        [a, b]
            .iter()
            .map(|dir| {
                x.rows()
                    .into_iter()
                    .map(|r| (0..3).map(|k| (r[k] - mean[k]) * dir[k]).sum::<f64>().powi(2))
                    .sum::<f64>()
                    / n
            })
            .sum()
    }

    #[test]
    fn top_two_components_capture_most_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let x = Array2::from_shape_fn((20, 3), |(_, k)| {
            rng.random_range(-1.0..1.0) * [3.0, 1.5, 0.4][k]
        });
        let axes = principal_axes(x.view());
        let best = captured(&x, &axes.components[0], &axes.components[1]);
        assert!((best - axes.variances[0] - axes.variances[1]).abs() < 1e-10);

        // Oracle: squared singular values of the centered matrix, from
        // nalgebra's SVD rather than the eigen-decomposition.
        let n = x.nrows();
        let mean: Vec<f64> = (0..3).map(|k| x.column(k).sum() / n as f64).collect();
        let centered = DMatrix::from_fn(n, 3, |i, k| x[[i, k]] - mean[k]);
        let mut sv: Vec<f64> = centered.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let oracle = (sv[0] * sv[0] + sv[1] * sv[1]) / n as f64;
        assert!((best - oracle).abs() < 1e-10);

        for _ in 0..500 {
            let mut a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            a.iter_mut().for_each(|v| *v /= na);
            let mut b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dot: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
            b.iter_mut().zip(&a).for_each(|(v, p)| *v -= dot * p);
            let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            b.iter_mut().for_each(|v| *v /= nb);
            assert!(captured(&x, &a, &b) <= best + 1e-10);
        }
    }
}
