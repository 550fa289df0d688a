//! Embeds three well-separated Gaussian blobs with exact t-SNE and reports
//! the 5-nearest-neighbour label purity of the result.
//!
//! ```bash
//! cargo run -p chirp-atlas --example tsne_blobs
//! ```

use chirp_atlas::embed::{run_tsne_on, TsneConfig};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let per = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let centers = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]];
    let mut x = Array2::zeros((3 * per, 3));
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for k in 0..per {
            for d in 0..3 {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[c * per + k, d]] = center[d] + z;
            }
            labels.push(c);
        }
    }

    let start = std::time::Instant::now();
    let embedding = run_tsne_on(x.view(), &TsneConfig::default()).expect("t-SNE run");
    println!("embedded {} points in {:.2?}", x.nrows(), start.elapsed());
    let ex = embedding.config.exaggeration_until_iter;
    println!(
        "KL after exaggeration {:.4}, final {:.4}",
        embedding.kl_trace[ex - 1],
        embedding.final_kl
    );

    let y = &embedding.coords;
    let n = y.nrows();
    let mut pure = 0usize;
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((y[[i, 0]] - y[[j, 0]]).powi(2) + (y[[i, 1]] - y[[j, 1]]).powi(2), j))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pure += d[..5].iter().filter(|(_, j)| labels[*j] == labels[i]).count();
    }
    println!("5-NN label purity: {:.3}", pure as f64 / (5 * n) as f64);
}
