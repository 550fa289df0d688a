use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::affinity::{conditional_affinities, symmetrize};
use super::objective::{gradient_into, kl_from_weights, student_t_weights};
use super::pca::pca_init;
use crate::error::{Error, Result};
use crate::ingest::FeatureMatrix;

const DUPLICATE_JITTER: f64 = 1e-10;

/// Optimizer settings. Defaults are the conventional reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub n_iterations: usize,
    pub learning_rate: f64,
    pub momentum_early: f64,
    pub momentum_late: f64,
    pub momentum_switch_iter: usize,
    pub exaggeration_factor: f64,
    pub exaggeration_until_iter: usize,
    pub seed: u64,
    pub output_dims: usize,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            n_iterations: 1000,
            learning_rate: 200.0,
            momentum_early: 0.5,
            momentum_late: 0.8,
            momentum_switch_iter: 250,
            exaggeration_factor: 12.0,
            exaggeration_until_iter: 250,
            seed: 0,
            output_dims: 2,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.perplexity > 0.0 && self.perplexity < n as f64) {
            return bad(format!("perplexity {} must lie in (0, {n})", self.perplexity));
        }
        if self.n_iterations == 0 {
            return bad("n_iterations must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        for m in [self.momentum_early, self.momentum_late] {
            if !(0.0..1.0).contains(&m) {
                return bad(format!("momentum {m} outside [0, 1)"));
            }
        }
        if !(self.exaggeration_factor >= 1.0) {
            return bad(format!("exaggeration_factor {} < 1", self.exaggeration_factor));
        }
        if self.exaggeration_until_iter > self.n_iterations {
            return bad("exaggeration_until_iter exceeds n_iterations".into());
        }
        if self.output_dims != 2 {
            return bad(format!("only 2 output dimensions are supported, got {}", self.output_dims));
        }
        Ok(())
    }
}

/// Diagnostics from a run that a reader may want to audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    /// Initialization fell back to seeded noise.
    pub pca_fallback: bool,
    /// Rows jittered because they duplicated an earlier row exactly.
    pub jittered_rows: Vec<usize>,
    /// Rows whose bandwidth search stopped at the step cap.
    pub unconverged_perplexity_rows: Vec<usize>,
    pub max_perplexity_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub ids: Vec<String>,
    /// N×2, aligned with the input rows.
    pub coords: Array2<f64>,
    pub config: TsneConfig,
    /// KL divergence (against the un-exaggerated affinities) at the start of
    /// every iteration.
    pub kl_trace: Vec<f64>,
    /// KL divergence of the returned coordinates.
    pub final_kl: f64,
    pub meta: EmbeddingMeta,
}

pub fn run_tsne(matrix: &FeatureMatrix, config: &TsneConfig) -> Result<Embedding> {
    let mut e = run_tsne_on(matrix.values.view(), config)?;
    e.ids = matrix.ids.clone();
    Ok(e)
}

/// Runs t-SNE on a raw N×d array; ids are the row indices.
pub fn run_tsne_on(x: ArrayView2<'_, f64>, config: &TsneConfig) -> Result<Embedding> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::InvalidInput(format!("t-SNE needs at least 3 points, got {n}")));
    }
    config.validate(n)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }

    let (x, jittered_rows) = jitter_duplicates(x, config.seed);
    let cond = conditional_affinities(x.view(), config.perplexity)?;
    let max_perplexity_error = cond
        .perplexities
        .iter()
        .map(|p| (p - config.perplexity).abs())
        .fold(0.0, f64::max);
    let p = symmetrize(&cond.p)?;
    let p = p.view();

    let init = pca_init(x.view(), config.seed)?;
    let mut y = init.coords;
    let mut y_prev = y.clone();
    let mut grad = Array2::zeros((n, 2));
    let mut kl_trace = Vec::with_capacity(config.n_iterations);

    for iter in 0..config.n_iterations {
        let (weights, z) = student_t_weights(y.view());
        kl_trace.push(kl_from_weights(p, &weights, z));

        let exaggeration = if iter < config.exaggeration_until_iter {
            config.exaggeration_factor
        } else {
            1.0
        };
        let momentum = if iter < config.momentum_switch_iter {
            config.momentum_early
        } else {
            config.momentum_late
        };
        gradient_into(p, exaggeration, y.view(), &weights, z, &mut grad);

        let mut finite = true;
        for ((cur, prev), g) in y.iter_mut().zip(y_prev.iter_mut()).zip(grad.iter()) {
            let next = *cur - config.learning_rate * g + momentum * (*cur - *prev);
            *prev = *cur;
            *cur = next;
            finite &= next.is_finite();
        }
        if !finite {
            return Err(Error::NonFinite { iteration: iter });
        }
    }

    let (weights, z) = student_t_weights(y.view());
    let final_kl = kl_from_weights(p, &weights, z);
    Ok(Embedding {
        ids: (0..n).map(|i| i.to_string()).collect(),
        coords: y,
        config: config.clone(),
        kl_trace,
        final_kl,
        meta: EmbeddingMeta {
            pca_fallback: init.fallback,
            jittered_rows,
            unconverged_perplexity_rows: cond.unconverged_rows,
            max_perplexity_error,
        },
    })
}

/// Adds seeded noise of scale 1e-10 to every row that exactly repeats an
/// earlier one.
fn jitter_duplicates(x: ArrayView2<'_, f64>, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut out = x.to_owned();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut dupes = Vec::new();
    for (i, row) in x.rows().into_iter().enumerate() {
        let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
        if seen.insert(key, i).is_some() {
            dupes.push(i);
        }
    }
    if !dupes.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a09_e667_f3bc_c908);
        for &i in &dupes {
            for v in out.row_mut(i).iter_mut() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                *v += DUPLICATE_JITTER * noise;
            }
        }
    }
    (out, dupes)
}
