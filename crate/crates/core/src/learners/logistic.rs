//! L2-penalized logistic regression fitted by gradient ascent with a
//! backtracking (Armijo) line search. Trial steps use the Barzilai-Borwein
//! length so ill-conditioned problems still converge in reasonable time.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2_lambda: 1e-4,
            max_iters: 20_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

impl LogisticModel {
    pub fn probability(&self, x: ArrayView1<'_, f64>) -> f64 {
        sigmoid(self.margin(x))
    }

    fn margin(&self, x: ArrayView1<'_, f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias
    }

    /// Class 1 when `σ(wᵀx + b) ≥ 0.5`.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> usize {
        usize::from(self.margin(x) >= 0.0)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean log-likelihood minus `λ/2 |w|²`; `theta` is `[w..., b]`.
pub fn penalized_log_likelihood(x: ArrayView2<'_, f64>, labels: &[usize], lambda: f64, theta: &[f64]) -> f64 {
    let d = x.ncols();
    let n = x.nrows() as f64;
    let ll: f64 = x
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &l)| {
            let z = row.iter().zip(&theta[..d]).map(|(a, w)| a * w).sum::<f64>() + theta[d];
            if l == 1 {
                -softplus(-z)
            } else {
                -softplus(z)
            }
        })
        .sum();
    ll / n - 0.5 * lambda * theta[..d].iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`penalized_log_likelihood`].
pub fn penalized_gradient(x: ArrayView2<'_, f64>, labels: &[usize], lambda: f64, theta: &[f64]) -> Vec<f64> {
    let d = x.ncols();
    let n = x.nrows() as f64;
    let mut g = vec![0.0; d + 1];
    for (row, &l) in x.rows().into_iter().zip(labels) {
        let z = row.iter().zip(&theta[..d]).map(|(a, w)| a * w).sum::<f64>() + theta[d];
        let r = l as f64 - sigmoid(z);
        for k in 0..d {
            g[k] += r * row[k];
        }
        g[d] += r;
    }
    for k in 0..d {
        g[k] = g[k] / n - lambda * theta[k];
    }
    g[d] /= n;
    g
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn fit_logistic(x: ArrayView2<'_, f64>, labels: &[usize], config: &LogisticConfig) -> LogisticModel {
    let d = x.ncols();
    let lambda = config.l2_lambda;
    let f = |t: &[f64]| penalized_log_likelihood(x, labels, lambda, t);

    let mut theta = vec![0.0; d + 1];
    let mut value = f(&theta);
    let mut grad = penalized_gradient(x, labels, lambda, &theta);
    let mut step = 1.0;
    let mut iterations = 0;

    while norm(&grad) >= config.tol && iterations < config.max_iters {
        iterations += 1;
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let mut t = step;
        let mut candidate;
        loop {
            candidate = theta.iter().zip(&grad).map(|(p, g)| p + t * g).collect::<Vec<_>>();
            let v = f(&candidate);
            if v >= value + 1e-4 * t * g2 || t < 1e-16 {
                value = v;
                break;
            }
            t *= 0.5;
        }
        let new_grad = penalized_gradient(x, labels, lambda, &candidate);
        // Barzilai-Borwein trial length for the next iteration
        let s: Array1<f64> = candidate.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yk: Array1<f64> = grad.iter().zip(&new_grad).map(|(a, b)| a - b).collect();
        let sy = s.dot(&yk);
        step = if sy > 0.0 { (s.dot(&s) / sy).clamp(1e-10, 1e10) } else { 1.0 };
        theta = candidate;
        grad = new_grad;
    }

    let grad_norm = norm(&grad);
    LogisticModel {
        bias: theta[d],
        weights: theta[..d].to_vec(),
        iterations,
        grad_norm,
        converged: grad_norm < config.tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mirrored(seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 40;
        let mut x = Array2::zeros((2 * half, 2));
        let mut y = vec![0; 2 * half];
        for i in 0..half {
            let p = [rng.random_range(0.0..3.0), rng.random_range(-2.0..2.0)];
            x[[i, 0]] = p[0];
            x[[i, 1]] = p[1];
            y[i] = 1;
            x[[half + i, 0]] = -p[0];
            x[[half + i, 1]] = -p[1];
        }
        (x, y)
    }

    #[test]
    fn mirror_symmetric_classes_have_zero_bias() {
        let (x, y) = mirrored(1);
        let m = fit_logistic(x.view(), &y, &LogisticConfig::default());
        assert!(m.converged, "grad norm {}", m.grad_norm);
        assert!(m.bias.abs() < 1e-6);
        assert_eq!(m.predict(array![0.5, 0.0].view()), 1);
        assert_eq!(m.predict(array![-0.5, 0.0].view()), 0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = mirrored(2);
        let mut y = y;
        y[3] = 0; // break the mirror so the optimum has a nonzero bias
        let cfg = LogisticConfig {
            l2_lambda: 1e-2,
            ..Default::default()
        };
        let m = fit_logistic(x.view(), &y, &cfg);
        assert!(m.converged);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let optimum: Vec<f64> = m.weights.iter().copied().chain([m.bias]).collect();
        let random: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        for theta in [optimum.clone(), random] {
            let g = penalized_gradient(x.view(), &y, cfg.l2_lambda, &theta);
            let h = 1e-5;
            for k in 0..3 {
                let mut p = theta.clone();
                p[k] += h;
                let mut q = theta.clone();
                q[k] -= h;
                let fd = (penalized_log_likelihood(x.view(), &y, cfg.l2_lambda, &p)
                    - penalized_log_likelihood(x.view(), &y, cfg.l2_lambda, &q))
                    / (2.0 * h);
                let scale = g[k].abs().max(fd.abs()).max(1.0);
                assert!((g[k] - fd).abs() / scale < 1e-5, "k={k} g={} fd={fd}", g[k]);
            }
        }
        // at the optimum the finite-difference gradient also vanishes
        let g = penalized_gradient(x.view(), &y, cfg.l2_lambda, &optimum);
        assert!(norm(&g) < cfg.tol);
    }

    #[test]
    fn restarts_agree() {
        let (x, mut y) = mirrored(3);
        y[0] = 0;
        y[50] = 1;
        let cfg = LogisticConfig::default();
        let a = fit_logistic(x.view(), &y, &cfg);
        let b = fit_logistic(x.view(), &y, &LogisticConfig { max_iters: cfg.max_iters * 2, ..cfg.clone() });
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-3);
        }
    }
}
