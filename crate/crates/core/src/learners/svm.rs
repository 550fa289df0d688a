//! Soft-margin support vector classifier trained by sequential minimal
//! optimization with maximal-violating-pair working-set selection.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: KernelKind,
    /// RBF width; `None` resolves to `1 / (d · var(X))` at fit time.
    pub gamma: Option<f64>,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration budget in units of N pair updates.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: KernelKind::Rbf,
            gamma: None,
            tol: 1e-3,
            max_passes: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match self {
            Kernel::Linear => a.dot(&b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    /// Rows with a nonzero multiplier.
    pub support_vectors: Array2<f64>,
    /// `alpha_i · y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    /// Decision value is `Σ coef_i K(sv_i, x) - rho`.
    pub rho: f64,
    /// Multipliers for every training row, in input order.
    pub alphas: Vec<f64>,
    /// Dual objective `Σα - ½ αᵀQα` at the returned iterate.
    pub dual_objective: f64,
    /// Maximal KKT violation at the returned iterate.
    pub kkt_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn decision_value(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.support_vectors
            .rows()
            .into_iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }

    /// Class 1 when the decision value is positive.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> usize {
        usize::from(self.decision_value(x) > 0.0)
    }
}

/// `1 / (d · var)` over all entries of `x`, as used by common SVM libraries.
pub fn default_gamma(x: ArrayView2<'_, f64>) -> f64 {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}

pub fn fit_svm(x: ArrayView2<'_, f64>, labels: &[usize], config: &SvmConfig) -> SvmModel {
    let n = x.nrows();
    assert_eq!(n, labels.len());
    let kernel = match config.kernel {
        KernelKind::Linear => Kernel::Linear,
        KernelKind::Rbf => Kernel::Rbf {
            gamma: config.gamma.unwrap_or_else(|| default_gamma(x)),
        },
    };
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * kernel.eval(x.row(i), x.row(j));
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    let c = config.c;
    let solution = solve_dual(&q, &y, c, config.tol, config.max_passes.saturating_mul(n.max(1)));

    let mut sv_rows = Vec::new();
    let mut dual_coef = Vec::new();
    for i in 0..n {
        if solution.alpha[i] > 0.0 {
            sv_rows.push(i);
            dual_coef.push(solution.alpha[i] * y[i]);
        }
    }
    let support_vectors = Array2::from_shape_fn((sv_rows.len(), x.ncols()), |(r, k)| x[[sv_rows[r], k]]);
    let dual_objective = solution.alpha.iter().sum::<f64>()
        - 0.5 * solution
            .alpha
            .iter()
            .zip(&solution.grad)
            .map(|(a, g)| a * (g + 1.0))
            .sum::<f64>();
    SvmModel {
        kernel,
        support_vectors,
        dual_coef,
        rho: solution.rho,
        alphas: solution.alpha,
        dual_objective,
        kkt_gap: solution.gap,
        iterations: solution.iterations,
        converged: solution.converged,
    }
}

struct DualSolution {
    alpha: Vec<f64>,
    /// Gradient of `½ αᵀQα - eᵀα`.
    grad: Vec<f64>,
    rho: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Maximal violating pair `(i, j, m - M)`.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> Option<(usize, usize, f64)> {
    let mut up: Option<(usize, f64)> = None;
    let mut low: Option<(usize, f64)> = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && up.is_none_or(|(_, m)| v > m) {
            up = Some((t, v));
        }
        if in_low(alpha[t], y[t], c) && low.is_none_or(|(_, m)| v < m) {
            low = Some((t, v));
        }
    }
    match (up, low) {
        (Some((i, m)), Some((j, mm))) => Some((i, j, m - mm)),
        _ => None,
    }
}

fn solve_dual(q: &Array2<f64>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = 0.0;

    loop {
        let Some((i, j, g)) = select_pair(&alpha, &grad, y, c) else {
            converged = true;
            break;
        };
        gap = g;
        if g < tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ai, aj) = update_pair(q, y, &grad, &alpha, i, j, c);
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] += q[[t, i]] * di + q[[t, j]] * dj;
        }
    }
    if !converged {
        gap = select_pair(&alpha, &grad, y, c).map_or(0.0, |(_, _, g)| g);
    }

    DualSolution {
        rho: compute_rho(&alpha, &grad, y, c),
        alpha,
        grad,
        gap,
        iterations,
        converged,
    }
}

/// Analytic two-variable update clipped to the box, keeping `yᵀα` fixed.
fn update_pair(
    q: &Array2<f64>,
    y: &[f64],
    grad: &[f64],
    alpha: &[f64],
    i: usize,
    j: usize,
    c: f64,
) -> (f64, f64) {
    let (mut ai, mut aj) = (alpha[i], alpha[j]);
    if y[i] != y[j] {
        let quad = (q[[i, i]] + q[[j, j]] + 2.0 * q[[i, j]]).max(1e-12);
        let delta = (-grad[i] - grad[j]) / quad;
        let diff = ai - aj;
        ai += delta;
        aj += delta;
        if diff > 0.0 {
            if aj < 0.0 {
                aj = 0.0;
                ai = diff;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = -diff;
        }
        if diff > 0.0 {
            if ai > c {
                ai = c;
                aj = c - diff;
            }
        } else if aj > c {
            aj = c;
            ai = c + diff;
        }
    } else {
        let quad = (q[[i, i]] + q[[j, j]] - 2.0 * q[[i, j]]).max(1e-12);
        let delta = (grad[i] - grad[j]) / quad;
        let sum = ai + aj;
        ai -= delta;
        aj += delta;
        if sum > c {
            if ai > c {
                ai = c;
                aj = sum - c;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > c {
            if aj > c {
                aj = c;
                ai = sum - c;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
    }
    (ai, aj)
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}
