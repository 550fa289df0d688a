//! Runs every stage on a synthetic dataset, exactly as
//! `chirp-atlas synth` followed by `chirp-atlas pipeline` would.
//!
//! ```bash
//! cargo run -p chirp-atlas --example full_pipeline -- /tmp/chirp-run
//! ```

use std::path::PathBuf;

use chirp_atlas::cli::{cmd_pipeline, cmd_synth, PipelineConfig};

fn main() -> chirp_atlas::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/examples-out/pipeline"));
    let mut cfg = PipelineConfig {
        out_dir: out.clone(),
        ..PipelineConfig::default()
    };
    cfg.input = Some(cmd_synth(&cfg)?);
    cmd_pipeline(&cfg)?;

    let report = std::fs::read_to_string(out.join("eval_report.json")).expect("report written");
    println!("config sha256 {}", cfg.hash());
    println!("eval report: {} bytes", report.len());
    let mut figures: Vec<_> = std::fs::read_dir(out.join("figures"))
        .expect("figures written")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    figures.sort();
    for f in figures {
        println!("  figures/{f}");
    }
    Ok(())
}
