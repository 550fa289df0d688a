use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::tsne::{Embedding, EmbeddingMeta, TsneConfig};
use crate::error::{Error, Result};

/// JSON metadata written next to the `id,tsne_x,tsne_y` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSidecar {
    pub n: usize,
    pub config: TsneConfig,
    pub seed: u64,
    pub final_kl: f64,
    pub kl_trace: Vec<f64>,
    pub meta: EmbeddingMeta,
    /// Free-form provenance (config hash, master seed) filled by the caller.
    #[serde(default)]
    pub provenance: Option<serde_json::Value>,
}

impl EmbeddingSidecar {
    pub fn of(e: &Embedding) -> Self {
        EmbeddingSidecar {
            n: e.coords.nrows(),
            config: e.config.clone(),
            seed: e.config.seed,
            final_kl: e.final_kl,
            kl_trace: e.kl_trace.clone(),
            meta: e.meta.clone(),
            provenance: None,
        }
    }
}

pub fn write_embedding<W: Write>(writer: W, e: &Embedding) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "tsne_x", "tsne_y"])?;
    for (id, row) in e.ids.iter().zip(e.coords.rows()) {
        w.write_record([id.clone(), format!("{}", row[0]), format!("{}", row[1])])?;
    }
    w.flush().map_err(|err| Error::io("<embedding csv>", err))?;
    Ok(())
}

pub fn read_embedding<R: Read>(table: R, sidecar: &EmbeddingSidecar) -> Result<Embedding> {
    let mut rdr = csv::Reader::from_reader(table);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "tsne_x", "tsne_y"] {
        return Err(Error::InvalidInput("embedding header must be id,tsne_x,tsne_y".into()));
    }
    let mut ids = Vec::new();
    let mut flat = Vec::new();
    for row in rdr.records() {
        let row = row?;
        ids.push(row[0].to_string());
        for k in 1..3 {
            let v: f64 = row[k]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad coordinate `{}`", &row[k])))?;
            flat.push(v);
        }
    }
    let coords = Array2::from_shape_vec((ids.len(), 2), flat)
        .map_err(|err| Error::InvalidInput(err.to_string()))?;
    Ok(Embedding {
        ids,
        coords,
        config: sidecar.config.clone(),
        kl_trace: sidecar.kl_trace.clone(),
        final_kl: sidecar.final_kl,
        meta: sidecar.meta.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn table_roundtrip_is_exact() {
        let e = Embedding {
            ids: vec!["a".into(), "b".into()],
            coords: array![[0.1 + 0.2, -1e-300], [std::f64::consts::PI, 12345.678_901_234_5]],
            config: TsneConfig::default(),
            kl_trace: vec![1.0, 0.5],
            final_kl: 0.25,
            meta: EmbeddingMeta::default(),
        };
        let mut buf = Vec::new();
        write_embedding(&mut buf, &e).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("id,tsne_x,tsne_y\n"));
        let back = read_embedding(buf.as_slice(), &EmbeddingSidecar::of(&e)).unwrap();
        assert_eq!(back, e);
    }
}
