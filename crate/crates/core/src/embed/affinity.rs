use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PERPLEXITY_TOL: f64 = 1e-5;
const MAX_BISECTION_STEPS: usize = 50;
const LOG_BETA_MIN: f64 = -46.051_701_859_880_914; // ln(1e-20)
const LOG_BETA_MAX: f64 = 46.051_701_859_880_914; // ln(1e20)

/// Row-conditional Gaussian affinities `p_{j|i}` with their bandwidths.
#[derive(Debug, Clone)]
pub struct ConditionalAffinities {
    /// Row-stochastic, zero diagonal.
    pub p: Array2<f64>,
    /// Inverse bandwidth of each row's Gaussian.
    pub betas: Vec<f64>,
    /// `2^H(P_i)` achieved by each row.
    pub perplexities: Vec<f64>,
    /// Rows whose bisection hit the step cap before reaching tolerance; the
    /// nearest achieved bandwidth is kept for them.
    pub unconverged_rows: Vec<usize>,
}

/// Symmetric joint distribution over ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    p: Array2<f64>,
}

impl AffinityMatrix {
    pub fn as_array(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.p.view()
    }

    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

pub fn squared_distances(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    d.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = x.row(i);
            for j in 0..n {
                if j != i {
                    row[j] = xi
                        .iter()
                        .zip(x.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                }
            }
        });
    d
}

/// Perplexity `2^H` (entropy in bits) of a probability row, skipping index `skip`.
pub fn row_perplexity(row: ArrayView1<'_, f64>, skip: usize) -> f64 {
    let h: f64 = row
        .iter()
        .enumerate()
        .filter(|(j, p)| *j != skip && **p > 0.0)
        .map(|(_, p)| -p * p.log2())
        .sum();
    h.exp2()
}

struct RowFit {
    probs: Vec<f64>,
    beta: f64,
    perplexity: f64,
    converged: bool,
}

/// Gaussian row for one `beta`: returns probabilities and the perplexity.
fn gaussian_row(dist: &[f64], skip: usize, dmin: f64, beta: f64, out: &mut [f64]) -> f64 {
    let mut z = 0.0;
    for (j, (o, d)) in out.iter_mut().zip(dist).enumerate() {
        *o = if j == skip { 0.0 } else { (-beta * (d - dmin)).exp() };
        z += *o;
    }
    let mut weighted = 0.0;
    for (j, (o, d)) in out.iter_mut().zip(dist).enumerate() {
        *o /= z;
        if j != skip {
            weighted += *o * (d - dmin);
        }
    }
    let entropy_nats = z.ln() + beta * weighted;
    (entropy_nats / std::f64::consts::LN_2).exp2()
}

fn fit_row(dist: &[f64], i: usize, perplexity: f64) -> Result<RowFit> {
    let n = dist.len();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for (j, d) in dist.iter().enumerate() {
        if j != i {
            dmin = dmin.min(*d);
            dmax = dmax.max(*d);
        }
    }
    if dmax == 0.0 {
        return Err(Error::PerplexityUnreachable { row: i });
    }

    let mut probs = vec![0.0; n];
    let (mut lo, mut hi) = (LOG_BETA_MIN, LOG_BETA_MAX);
    let mut best: Option<(f64, f64, f64)> = None; // (error, beta, perplexity)
    for _ in 0..MAX_BISECTION_STEPS {
        let log_beta = 0.5 * (lo + hi);
        let beta = log_beta.exp();
        let perp = gaussian_row(dist, i, dmin, beta, &mut probs);
        let err = (perp - perplexity).abs();
        if best.is_none_or(|(e, _, _)| err < e) {
            best = Some((err, beta, perp));
        }
        if err < PERPLEXITY_TOL {
            return Ok(RowFit {
                probs,
                beta,
                perplexity: perp,
                converged: true,
            });
        }
        // Entropy decreases as beta grows.
        if perp > perplexity {
            lo = log_beta;
        } else {
            hi = log_beta;
        }
    }
    let (_, beta, perp) = best.expect("at least one bisection step");
    gaussian_row(dist, i, dmin, beta, &mut probs);
    Ok(RowFit {
        probs,
        beta,
        perplexity: perp,
        converged: false,
    })
}

/// Per-row Gaussian conditionals on Euclidean distance, each calibrated by
/// bisection on `log beta` so that `2^H(P_i)` hits `perplexity`.
pub fn conditional_affinities(
    x: ArrayView2<'_, f64>,
    perplexity: f64,
) -> Result<ConditionalAffinities> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 points, got {n}")));
    }
    if !(perplexity > 0.0 && perplexity < n as f64) {
        return Err(Error::InvalidConfig(format!(
            "perplexity {perplexity} must lie in (0, {n})"
        )));
    }
    let d = squared_distances(x);
    let fits: Vec<RowFit> = (0..n)
        .into_par_iter()
        .map(|i| fit_row(d.row(i).as_slice().expect("standard layout"), i, perplexity))
        .collect::<Result<_>>()?;

    let mut p = Array2::zeros((n, n));
    let mut betas = Vec::with_capacity(n);
    let mut perplexities = Vec::with_capacity(n);
    let mut unconverged_rows = Vec::new();
    for (i, fit) in fits.into_iter().enumerate() {
        p.row_mut(i).assign(&ArrayView1::from(&fit.probs));
        betas.push(fit.beta);
        perplexities.push(fit.perplexity);
        if !fit.converged {
            unconverged_rows.push(i);
        }
    }
    Ok(ConditionalAffinities {
        p,
        betas,
        perplexities,
        unconverged_rows,
    })
}

/// `p_ij = (p_{j|i} + p_{i|j}) / 2N`.
pub fn symmetrize(conditionals: &Array2<f64>) -> Result<AffinityMatrix> {
    let n = conditionals.nrows();
    if n == 0 || conditionals.ncols() != n {
        return Err(Error::InvalidInput("conditionals must be a nonempty square matrix".into()));
    }
    for i in 0..n {
        if conditionals[[i, i]] != 0.0 {
            return Err(Error::InvalidInput(format!("nonzero diagonal at row {i}")));
        }
        let s = conditionals.row(i).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
        }
    }
    let denom = 2.0 * n as f64;
    let mut p = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[[i, j]] = (conditionals[[i, j]] + conditionals[[j, i]]) / denom;
            }
        }
    }
    Ok(AffinityMatrix { p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(&mut rng))
    }

    #[test]
    fn uniform_row_has_perplexity_k() {
        for k in [1usize, 2, 5, 17] {
            let mut row = ndarray::Array1::zeros(k + 1);
            for j in 1..=k {
                row[j] = 1.0 / k as f64;
            }
            assert!((row_perplexity(row.view(), 0) - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn equilateral_points_split_evenly() {
        // pairwise squared distances are exactly 2
        let x = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for perp in [0.5, 1.5, 2.5] {
            let c = conditional_affinities(x.view(), perp).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 0.0 } else { 0.5 };
                    assert!((c.p[[i, j]] - want).abs() < 1e-12, "{perp} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn seeded_rows_hit_target_perplexity() {
        let x = normal(10, 3, 11);
        let c = conditional_affinities(x.view(), 5.0).unwrap();
        assert!(c.unconverged_rows.is_empty());
        for i in 0..10 {
            let realized = row_perplexity(c.p.row(i), i);
            assert!((realized - 5.0).abs() <= 1e-3, "row {i}: {realized}");
            assert!((c.p.row(i).sum() - 1.0).abs() < 1e-12);
            assert_eq!(c.p[[i, i]], 0.0);
        }
    }

    #[test]
    fn duplicate_only_row_is_unreachable() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        match conditional_affinities(x.view(), 1.5) {
            Err(Error::PerplexityUnreachable { row }) => assert_eq!(row, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perplexity_must_be_below_n() {
        let x = normal(5, 2, 1);
        assert!(conditional_affinities(x.view(), 5.0).is_err());
        assert!(conditional_affinities(x.view(), 0.0).is_err());
    }

    #[test]
    fn symmetric_input_is_scaled_by_n() {
        let c = array![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        let p = symmetrize(&c).unwrap();
        for (a, b) in p.as_array().iter().zip(c.iter()) {
            assert!((a - b / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetrize_matches_brute_force() {
        let x = normal(5, 3, 5);
        let c = conditional_affinities(x.view(), 2.0).unwrap();
        let p = symmetrize(&c.p).unwrap();
        let oracle = (&c.p + &c.p.t()) / 10.0;
        for (a, b) in p.as_array().iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p.as_array().sum() - 1.0).abs() < 1e-9);
        for i in 0..5 {
            assert_eq!(p.as_array()[[i, i]], 0.0);
            for j in 0..5 {
                assert!((p.as_array()[[i, j]] - p.as_array()[[j, i]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetrize_rejects_non_stochastic() {
        assert!(symmetrize(&array![[0.0, 0.7], [1.0, 0.0]]).is_err());
        assert!(symmetrize(&array![[0.5, 0.5], [1.0, 0.0]]).is_err());
    }
}
