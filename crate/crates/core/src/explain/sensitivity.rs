use std::io::{Read, Write};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regressors::CoordinateRegressors;
use super::shapley::shapley_values;
use crate::error::{Error, Result};
use crate::ingest::FeatureMatrix;

/// How the two per-axis attributions merge into one magnitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    /// sqrt(φx² + φy²)
    #[default]
    Euclidean,
    /// |φx| + |φy|
    L1,
}

impl CombineRule {
    pub fn combine(self, phi_x: f64, phi_y: f64) -> f64 {
        match self {
            CombineRule::Euclidean => phi_x.hypot(phi_y),
            CombineRule::L1 => phi_x.abs() + phi_y.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMap {
    pub ids: Vec<String>,
    pub features: Vec<String>,
    /// N × d attributions to the x coordinate.
    pub phi_x: Array2<f64>,
    pub phi_y: Array2<f64>,
    pub combined: Array2<f64>,
    pub base: [f64; 2],
    pub predictions: Vec<[f64; 2]>,
    pub rule: CombineRule,
}

impl SensitivityMap {
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }
}

/// Attributes both coordinate predictions of every row to its features.
pub fn build_sensitivity_map(
    regressors: &CoordinateRegressors,
    features: &FeatureMatrix,
    rule: CombineRule,
) -> Result<SensitivityMap> {
    let n = features.values.nrows();
    let d = features.values.ncols();
    if n == 0 {
        return Err(Error::InvalidInput("no rows to explain".into()));
    }
    let rows: Vec<_> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = features.values.row(i).to_vec();
            Ok((
                shapley_values(&regressors.model_x, &x)?,
                shapley_values(&regressors.model_y, &x)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut phi_x = Array2::zeros((n, d));
    let mut phi_y = Array2::zeros((n, d));
    let mut combined = Array2::zeros((n, d));
    let mut predictions = Vec::with_capacity(n);
    for (i, (ex, ey)) in rows.iter().enumerate() {
        for j in 0..d {
            phi_x[[i, j]] = ex.phi[j];
            phi_y[[i, j]] = ey.phi[j];
            combined[[i, j]] = rule.combine(ex.phi[j], ey.phi[j]);
        }
        predictions.push([ex.prediction, ey.prediction]);
    }
    Ok(SensitivityMap {
        ids: features.ids.clone(),
        features: features.columns.clone(),
        phi_x,
        phi_y,
        combined,
        base: [rows[0].0.base, rows[0].1.base],
        predictions,
        rule,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature: String,
    pub mean: f64,
    pub max: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean, max and linear-interpolated quartiles of each feature's combined
/// magnitude over all rows.
pub fn sensitivity_summary(map: &SensitivityMap) -> Vec<FeatureSummary> {
    map.features
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col = map.combined.column(j).to_vec();
            col.sort_by(f64::total_cmp);
            FeatureSummary {
                feature: name.clone(),
                mean: col.iter().sum::<f64>() / col.len() as f64,
                max: col[col.len() - 1],
                q25: quantile(&col, 0.25),
                median: quantile(&col, 0.5),
                q75: quantile(&col, 0.75),
            }
        })
        .collect()
}

/// JSON metadata written next to the attribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySidecar {
    pub n: usize,
    pub rule: CombineRule,
    pub base_x: f64,
    pub base_y: f64,
    pub r2_x: f64,
    pub r2_y: f64,
    pub constant_target: [bool; 2],
    pub summary: Vec<FeatureSummary>,
    #[serde(default)]
    pub provenance: Option<serde_json::Value>,
}

impl SensitivitySidecar {
    pub fn of(map: &SensitivityMap, regressors: &CoordinateRegressors) -> Self {
        SensitivitySidecar {
            n: map.ids.len(),
            rule: map.rule,
            base_x: map.base[0],
            base_y: map.base[1],
            r2_x: regressors.r2[0],
            r2_y: regressors.r2[1],
            constant_target: regressors.constant_target,
            summary: sensitivity_summary(map),
            provenance: None,
        }
    }
}

/// Long-format table: one `id,feature,phi_x,phi_y,combined` row per pair.
pub fn write_sensitivity<W: Write>(writer: W, map: &SensitivityMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "feature", "phi_x", "phi_y", "combined"])?;
    for (i, id) in map.ids.iter().enumerate() {
        for (j, f) in map.features.iter().enumerate() {
            w.write_record([
                id.clone(),
                f.clone(),
                format!("{}", map.phi_x[[i, j]]),
                format!("{}", map.phi_y[[i, j]]),
                format!("{}", map.combined[[i, j]]),
            ])?;
        }
    }
    w.flush().map_err(|err| Error::io("<sensitivity csv>", err))?;
    Ok(())
}

/// Reads a table written by [`write_sensitivity`]. Predictions are rebuilt
/// from the base values by efficiency.
pub fn read_sensitivity<R: Read>(reader: R, sidecar: &SensitivitySidecar) -> Result<SensitivityMap> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["id", "feature", "phi_x", "phi_y", "combined"] {
        return Err(Error::InvalidInput("sensitivity header must be id,feature,phi_x,phi_y,combined".into()));
    }
    let mut ids: Vec<String> = Vec::new();
    let mut features: Vec<String> = Vec::new();
    let mut flat = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if ids.last().map(String::as_str) != Some(&row[0]) {
            ids.push(row[0].to_string());
        }
        if ids.len() == 1 {
            features.push(row[1].to_string());
        } else if features.get((flat.len() / 3) % features.len()).map(String::as_str) != Some(&row[1]) {
            return Err(Error::InvalidInput(format!("unexpected feature `{}` for `{}`", &row[1], &row[0])));
        }
        let mut vals = [0.0; 3];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = row[k + 2]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad attribution `{}`", &row[k + 2])))?;
        }
        flat.extend(vals);
    }
    let (n, d) = (ids.len(), features.len());
    if n == 0 || flat.len() != 3 * n * d {
        return Err(Error::InvalidInput("sensitivity table is empty or ragged".into()));
    }
    let pick = |k: usize| Array2::from_shape_fn((n, d), |(i, j)| flat[3 * (i * d + j) + k]);
    let (phi_x, phi_y, combined) = (pick(0), pick(1), pick(2));
    let predictions = (0..n)
        .map(|i| [sidecar.base_x + phi_x.row(i).sum(), sidecar.base_y + phi_y.row(i).sum()])
        .collect();
    Ok(SensitivityMap {
        ids,
        features,
        phi_x,
        phi_y,
        combined,
        base: [sidecar.base_x, sidecar.base_y],
        predictions,
        rule: sidecar.rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::fit_coordinate_regressors;
    use crate::learners::RandomForestConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(n: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::from_array(Array2::from_shape_simple_fn((n, 3), || rng.random_range(-1.0..1.0)))
    }

    fn cfg() -> RandomForestConfig {
        RandomForestConfig { n_trees: 40, seed: 11, ..Default::default() }
    }

    #[test]
    fn combine_rules() {
        assert_eq!(CombineRule::Euclidean.combine(3.0, 4.0), 5.0);
        assert_eq!(CombineRule::Euclidean.combine(-2.0, 0.0), 2.0);
        assert_eq!(CombineRule::Euclidean.combine(0.0, 0.0), 0.0);
        assert_eq!(CombineRule::L1.combine(-3.0, 4.0), 7.0);
    }

    #[test]
    fn fifty_point_map_recomputes_and_is_efficient() {
        let m = matrix(50, 5);
        let coords = Array2::from_shape_fn((50, 2), |(i, k)| {
            let r = m.values.row(i);
            if k == 0 { r[0] + 0.3 * r[1] } else { r[2] * r[2] }
        });
        let reg = fit_coordinate_regressors(m.values.view(), coords.view(), &cfg()).unwrap();
        let map = build_sensitivity_map(&reg, &m, CombineRule::Euclidean).unwrap();
        for i in 0..50 {
            let x = m.values.row(i).to_vec();
            let preds = [reg.model_x.predict_value(&x), reg.model_y.predict_value(&x)];
            for (axis, phi) in [&map.phi_x, &map.phi_y].into_iter().enumerate() {
                let total = phi.row(i).sum() + map.base[axis];
                assert!((total - preds[axis]).abs() < 1e-9);
            }
            for j in 0..3 {
                let (a, b) = (map.phi_x[[i, j]], map.phi_y[[i, j]]);
                assert!((map.combined[[i, j]] - (a * a + b * b).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dominant_feature_has_largest_mean() {
        let m = matrix(120, 8);
        let coords = Array2::from_shape_fn((120, 2), |(i, _)| 4.0 * m.values[[i, 1]]);
        let reg = fit_coordinate_regressors(m.values.view(), coords.view(), &cfg()).unwrap();
        let map = build_sensitivity_map(&reg, &m, CombineRule::Euclidean).unwrap();
        let s = sensitivity_summary(&map);
        assert!(s[1].mean > s[0].mean && s[1].mean > s[2].mean, "{s:?}");
        for f in &s {
            assert!(f.q25 <= f.median && f.median <= f.q75 && f.q75 <= f.max);
        }
    }

    #[test]
    fn flat_axis_reduces_to_absolute_value() {
        let m = matrix(30, 2);
        let coords = Array2::from_shape_fn((30, 2), |(i, k)| if k == 0 { m.values[[i, 0]] } else { 1.0 });
        let reg = fit_coordinate_regressors(m.values.view(), coords.view(), &cfg()).unwrap();
        let map = build_sensitivity_map(&reg, &m, CombineRule::Euclidean).unwrap();
        assert!(map.phi_y.iter().all(|&v| v == 0.0));
        for (c, p) in map.combined.iter().zip(map.phi_x.iter()) {
            assert_eq!(*c, p.abs());
        }
    }

    #[test]
    fn uniform_summary() {
        let map = SensitivityMap {
            ids: vec!["a".into(), "b".into()],
            features: vec!["f".into()],
            phi_x: Array2::from_elem((2, 1), 0.5),
            phi_y: Array2::zeros((2, 1)),
            combined: Array2::from_elem((2, 1), 0.5),
            base: [0.0, 0.0],
            predictions: vec![[0.5, 0.0]; 2],
            rule: CombineRule::Euclidean,
        };
        let s = &sensitivity_summary(&map)[0];
        assert_eq!(s.mean, s.max);
        let mut buf = Vec::new();
        write_sensitivity(&mut buf, &map).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "id,feature,phi_x,phi_y,combined\na,f,0.5,0,0.5\nb,f,0.5,0,0.5\n");
    }

    #[test]
    fn table_round_trip() {
        let m = matrix(20, 3);
        let coords = Array2::from_shape_fn((20, 2), |(i, k)| m.values[[i, k]] * 0.1 + 1.0 / 3.0);
        let reg = fit_coordinate_regressors(m.values.view(), coords.view(), &cfg()).unwrap();
        let map = build_sensitivity_map(&reg, &m, CombineRule::L1).unwrap();
        let mut buf = Vec::new();
        write_sensitivity(&mut buf, &map).unwrap();
        let back = read_sensitivity(buf.as_slice(), &SensitivitySidecar::of(&map, &reg)).unwrap();
        assert_eq!(back.phi_x, map.phi_x);
        assert_eq!(back.phi_y, map.phi_y);
        assert_eq!(back.combined, map.combined);
        assert_eq!(back.ids, map.ids);
        assert_eq!(back.features, map.features);
    }
}
