//! Generates a synthetic chirp table, reads it back through the validating
//! loader and prints the class distribution and standardized feature scales.
//!
//! ```bash
//! cargo run -p chirp-atlas --example ingest_synthetic
//! ```

use chirp_atlas::cli::{synthesize, SynthConfig};
use chirp_atlas::ingest::{
    apply_weights, class_distribution, read_records, standardize, write_records, FeatureMatrix, FeatureWeights,
    Schema,
};

fn main() -> chirp_atlas::Result<()> {
    let records = synthesize(&SynthConfig::default(), 1)?;
    let mut table = Vec::new();
    write_records(&mut table, &records)?;
    // one malformed row to show the rejection report
    table.extend_from_slice(b"broken,1.2,NaN,4.0,S,2\n");

    let loaded = read_records(table.as_slice(), &Schema::default())?;
    println!("{} rows read, {} kept", loaded.total_rows(), loaded.records.len());
    print!("{}", loaded.rejection_report());

    let dist = class_distribution(&loaded.records)?;
    println!("outcome S/NR/F: {:.3?}", dist.outcome);
    println!("difficulty 1-4: {:.3?}", dist.difficulty);

    let z = standardize(&FeatureMatrix::from_records(&loaded.records))?;
    for (name, s) in z.columns.iter().zip(z.scaling.as_ref().unwrap()) {
        println!("{name:>18}: mean {:8.3}  sd {:6.3}", s.mean, s.sd);
    }
    let weighted = apply_weights(&z, &FeatureWeights::new(2.0, 1.0, 1.0))?;
    println!("first weighted row: {:.3}", weighted.values.row(0));
    Ok(())
}
