//! Explains an embedding: regression forests predict each t-SNE coordinate
//! from the features, and exact Shapley values attribute every prediction.
//! Writes `sensitivity.csv` and one SVG per feature into `target/examples-out`.

use std::fs;

use chirp_atlas::cli::{synthesize, SynthConfig};
use chirp_atlas::embed::{run_tsne, TsneConfig};
use chirp_atlas::explain::{
    build_sensitivity_map, fit_coordinate_regressors, sensitivity_summary, write_sensitivity, CombineRule,
};
use chirp_atlas::ingest::{standardize, FeatureMatrix};
use chirp_atlas::learners::RandomForestConfig;
use chirp_atlas::render::{render_sensitivity, PlotKind, PlotSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = synthesize(&SynthConfig { n_clusters: 4, ..SynthConfig::default() }, 2)?;
    let x = standardize(&FeatureMatrix::from_records(&records))?;
    let embedding = run_tsne(&x, &TsneConfig::default())?;

    let regressors =
        fit_coordinate_regressors(x.values.view(), embedding.coords.view(), &RandomForestConfig::default())?;
    println!("training R²: x {:.3}, y {:.3}", regressors.r2[0], regressors.r2[1]);
    let map = build_sensitivity_map(&regressors, &x, CombineRule::Euclidean)?;
    println!("base values: x {:.3}, y {:.3}", map.base[0], map.base[1]);
    for s in sensitivity_summary(&map) {
        println!(
            "{:>18}: mean {:.3}  median {:.3}  max {:.3}",
            s.feature, s.mean, s.median, s.max
        );
    }

    let out = std::path::Path::new("target/examples-out");
    fs::create_dir_all(out)?;
    let mut table = Vec::new();
    write_sensitivity(&mut table, &map)?;
    fs::write(out.join("sensitivity.csv"), table)?;
    for (j, f) in map.features.iter().enumerate() {
        let spec = PlotSpec::new(PlotKind::Sensitivity, format!("Sensitivity to {f}"));
        fs::write(
            out.join(format!("fig_sensitivity_{f}.svg")),
            render_sensitivity(embedding.coords.view(), &map, j, &spec)?,
        )?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
