//! Chirp feature atlas.
//!
//! Turns tabular chirp annotations (temporal duration, frequency onset and
//! spectral duration, plus clinical outcome and difficulty) into a 2-D
//! exact t-SNE embedding, trains four classifiers on that embedding for three
//! clinical labelings, explains the embedding coordinates with exact Shapley
//! values and writes every figure as static SVG.
//!
//! The stages are usable independently:
//!
//! - [`ingest`]: CSV loading, validation, standardization and weighting
//! - [`embed`]: perplexity-calibrated affinities and KL minimization
//! - [`learners`]: random forest, SMO support vector machine, logistic
//!   regression and k-nearest neighbours
//! - [`eval`]: scenario labelings, stratified folds, metrics
//! - [`explain`]: coordinate regressors and Shapley sensitivity maps
//! - [`render`]: SVG figures
//! - [`cli`]: the staged pipeline driven by a JSON config
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod embed;
pub mod error;
pub mod eval;
pub mod explain;
pub mod ingest;
pub mod learners;
pub mod render;
pub mod seed;

pub use error::{Error, Result};
