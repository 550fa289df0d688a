//! Exact t-SNE.
//!
//! High-dimensional Gaussian affinities are calibrated per row to a target
//! perplexity, symmetrized into a joint distribution and matched by a
//! Student-t (one degree of freedom) similarity over 2-D points. The KL
//! divergence between the two is minimized with momentum gradient descent
//! and early exaggeration, starting from a PCA projection.
//!
//! Everything is O(N²) and exact; rows are processed in parallel but every
//! reduction runs in a fixed order so results are bit-reproducible.

mod affinity;
mod io;
mod objective;
mod pca;
mod tsne;

pub use affinity::{
    conditional_affinities, row_perplexity, squared_distances, symmetrize, AffinityMatrix,
    ConditionalAffinities,
};
pub use io::{read_embedding, write_embedding, EmbeddingSidecar};
pub use objective::{kl_divergence, kl_gradient, low_dim_similarities, LowDimSimilarities};
pub use pca::{pca_init, principal_axes, PcaInit, PrincipalAxes};
pub use tsne::{run_tsne, run_tsne_on, Embedding, EmbeddingMeta, TsneConfig};
