//! Draws the decision regions of each classifier over three interleaved
//! clusters, with the minority class (label 1) in magenta.

use std::fs;

use chirp_atlas::learners::{ClassifierConfigs, ClassifierKind, LabeledPoints, TrainedModel};
use chirp_atlas::render::{grid_predictions, mesh_grid, render_boundary, PlotKind, PlotSpec};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let centers = [(-3.0, 0.0, 0), (0.0, 2.0, 1), (3.0, 0.0, 0)];
    let mut coords = Array2::zeros((3 * 60, 2));
    let mut labels = Vec::new();
    for (c, &(cx, cy, label)) in centers.iter().enumerate() {
        for k in 0..60 {
            let (zx, zy): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            coords[[c * 60 + k, 0]] = cx + zx;
            coords[[c * 60 + k, 1]] = cy + zy;
            labels.push(label);
        }
    }
    let points = LabeledPoints::new(coords, labels)?;

    let out = std::path::Path::new("target/examples-out");
    fs::create_dir_all(out)?;
    for kind in ClassifierKind::ALL {
        let model = TrainedModel::fit(&ClassifierConfigs::default().for_kind(kind).with_seed(1), &points)?;
        let grid = mesh_grid(points.coords.view(), 300)?;
        let share = grid_predictions(&model, &grid).iter().filter(|&&c| c == 1).count() as f64 / 90_000.0;
        let spec = PlotSpec {
            class_names: Some(["outer".into(), "middle".into()]),
            ..PlotSpec::new(PlotKind::Boundary, format!("{} decision boundary", kind.label()))
        };
        let path = out.join(format!("fig_boundary_demo_{}.svg", kind.short()));
        fs::write(&path, render_boundary(&model, &points, &spec)?)?;
        println!("{:<20} class-1 area {:5.1}%  -> {}", kind.label(), 100.0 * share, path.display());
    }
    Ok(())
}
