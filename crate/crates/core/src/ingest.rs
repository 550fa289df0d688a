//! Loading, validating, standardizing and weighting chirp records.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_NAMES: [&str; 3] = ["temporal_duration", "frequency_onset", "spectral_duration"];

/// Clinical outcome code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Surgical success.
    S,
    /// No resection performed.
    NR,
    /// Failure.
    F,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::S, Outcome::NR, Outcome::F];

    pub fn code(self) -> &'static str {
        match self {
            Outcome::S => "S",
            Outcome::NR => "NR",
            Outcome::F => "F",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        match code.trim() {
            "S" => Some(Outcome::S),
            "NR" => Some(Outcome::NR),
            "F" => Some(Outcome::F),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One annotated chirp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpRecord {
    pub id: String,
    /// Seconds.
    pub temporal_duration: f64,
    /// Hz.
    pub frequency_onset: f64,
    /// Hz, frequency span of the chirp.
    pub spectral_duration: f64,
    pub outcome: Outcome,
    /// 1 (very easy) to 4 (very difficult).
    pub difficulty: u8,
}

impl ChirpRecord {
    pub fn features(&self) -> [f64; 3] {
        [self.temporal_duration, self.frequency_onset, self.spectral_duration]
    }
}

/// Column-name mapping from an arbitrary export onto the record fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub id: String,
    pub temporal_duration: String,
    pub frequency_onset: String,
    pub spectral_duration: String,
    pub outcome: String,
    pub difficulty: String,
    pub delimiter: char,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            id: "id".into(),
            temporal_duration: "temporal_duration".into(),
            frequency_onset: "frequency_onset".into(),
            spectral_duration: "spectral_duration".into(),
            outcome: "outcome".into(),
            difficulty: "difficulty".into(),
            delimiter: ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    MissingValue(String),
    NonNumeric(String),
    NonFinite(String),
    NonPositive(String),
    UnknownOutcome(String),
    DifficultyOutOfRange(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::MissingValue(c) => write!(f, "missing value in `{c}`"),
            RejectReason::NonNumeric(c) => write!(f, "non-numeric value in `{c}`"),
            RejectReason::NonFinite(c) => write!(f, "non-finite value in `{c}`"),
            RejectReason::NonPositive(c) => write!(f, "non-positive value in `{c}`"),
            RejectReason::UnknownOutcome(v) => write!(f, "unknown outcome code `{v}`"),
            RejectReason::DifficultyOutOfRange(v) => write!(f, "difficulty out of range `{v}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub id: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRecords {
    pub records: Vec<ChirpRecord>,
    pub rejections: Vec<Rejection>,
}

impl LoadedRecords {
    pub fn total_rows(&self) -> usize {
        self.records.len() + self.rejections.len()
    }

    /// Line-oriented rejection report: `line<TAB>id<TAB>reason`.
    pub fn rejection_report(&self) -> String {
        let mut out = String::new();
        for r in &self.rejections {
            out.push_str(&format!("line {}\t{}\t{}\n", r.line, r.id, r.reason));
        }
        out
    }
}

pub fn load_records(path: impl AsRef<Path>, schema: &Schema) -> Result<LoadedRecords> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file, schema)
}

/// Same as [`load_records`] over any reader.
pub fn read_records<R: Read>(reader: R, schema: &Schema) -> Result<LoadedRecords> {
    let delimiter = u8::try_from(schema.delimiter)
        .map_err(|_| Error::InvalidConfig(format!("delimiter {:?} is not ASCII", schema.delimiter)))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let cols = [
        col(&schema.id)?,
        col(&schema.temporal_duration)?,
        col(&schema.frequency_onset)?,
        col(&schema.spectral_duration)?,
        col(&schema.outcome)?,
        col(&schema.difficulty)?,
    ];
    let names = [
        &schema.temporal_duration,
        &schema.frequency_onset,
        &schema.spectral_duration,
    ];

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(cols[i]).unwrap_or("");
        let id = field(0).to_string();
        match parse_row(&field, names) {
            Ok((features, outcome, difficulty)) => records.push(ChirpRecord {
                id,
                temporal_duration: features[0],
                frequency_onset: features[1],
                spectral_duration: features[2],
                outcome,
                difficulty,
            }),
            Err(reason) => rejections.push(Rejection { line, id, reason }),
        }
    }
    if records.is_empty() {
        return Err(Error::NoValidRows);
    }
    Ok(LoadedRecords {
        records,
        rejections,
    })
}

fn parse_row<'a>(
    field: &dyn Fn(usize) -> &'a str,
    names: [&String; 3],
) -> std::result::Result<([f64; 3], Outcome, u8), RejectReason> {
    let mut features = [0.0; 3];
    for (k, name) in names.iter().enumerate() {
        let raw = field(k + 1);
        if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
            return Err(RejectReason::MissingValue((*name).clone()));
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| RejectReason::NonNumeric((*name).clone()))?;
        if !v.is_finite() {
            return Err(RejectReason::NonFinite((*name).clone()));
        }
        if v <= 0.0 {
            return Err(RejectReason::NonPositive((*name).clone()));
        }
        features[k] = v;
    }
    let outcome_raw = field(4);
    let outcome =
        Outcome::parse(outcome_raw).ok_or_else(|| RejectReason::UnknownOutcome(outcome_raw.to_string()))?;
    let diff_raw = field(5);
    let difficulty = match diff_raw.parse::<u8>() {
        Ok(d @ 1..=4) => d,
        _ => return Err(RejectReason::DifficultyOutOfRange(diff_raw.to_string())),
    };
    Ok((features, outcome, difficulty))
}

/// Writes records in the canonical column layout.
pub fn write_records<W: Write>(writer: W, records: &[ChirpRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "id",
        "temporal_duration",
        "frequency_onset",
        "spectral_duration",
        "outcome",
        "difficulty",
    ])?;
    for r in records {
        w.write_record([
            r.id.clone(),
            format!("{}", r.temporal_duration),
            format!("{}", r.frequency_onset),
            format!("{}", r.spectral_duration),
            r.outcome.code().to_string(),
            r.difficulty.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Seeded subsample of `n` records, keeping the input order.
pub fn subsample(records: &[ChirpRecord], n: usize, seed: u64) -> Vec<ChirpRecord> {
    if n >= records.len() {
        return records.to_vec();
    }
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(n);
    idx.sort_unstable();
    idx.into_iter().map(|i| records[i].clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub w_temporal: f64,
    pub w_frequency: f64,
    pub w_spectral: f64,
}

impl FeatureWeights {
    pub const UNIT: FeatureWeights = FeatureWeights::new(1.0, 1.0, 1.0);

    pub const fn new(w_temporal: f64, w_frequency: f64, w_spectral: f64) -> Self {
        FeatureWeights {
            w_temporal,
            w_frequency,
            w_spectral,
        }
    }

    /// The unit weighting followed by doubling each feature in turn.
    pub fn scenarios() -> [FeatureWeights; 4] {
        [
            FeatureWeights::UNIT,
            FeatureWeights::new(2.0, 1.0, 1.0),
            FeatureWeights::new(1.0, 2.0, 1.0),
            FeatureWeights::new(1.0, 1.0, 2.0),
        ]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_temporal, self.w_frequency, self.w_spectral]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and nonnegative, got {w:?}"
            )));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidWeights("at least one weight must be positive".into()));
        }
        Ok(())
    }
}

impl Default for FeatureWeights {
    fn default() -> Self {
        FeatureWeights::UNIT
    }
}

impl std::str::FromStr for FeatureWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("weights `{s}` are not three numbers")))?;
        match parts.as_slice() {
            [a, b, c] => Ok(FeatureWeights::new(*a, *b, *c)),
            _ => Err(Error::InvalidConfig(format!("weights `{s}` are not three numbers"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    pub sd: f64,
}

/// Numeric feature matrix, rows aligned with record ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub values: Array2<f64>,
    /// Per-column parameters used by [`standardize`], if applied.
    pub scaling: Option<Vec<ColumnScaling>>,
    pub weights: Option<FeatureWeights>,
}

impl FeatureMatrix {
    pub fn from_records(records: &[ChirpRecord]) -> Self {
        let mut values = Array2::zeros((records.len(), 3));
        for (i, r) in records.iter().enumerate() {
            for (j, v) in r.features().into_iter().enumerate() {
                values[[i, j]] = v;
            }
        }
        FeatureMatrix {
            ids: records.iter().map(|r| r.id.clone()).collect(),
            columns: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            values,
            scaling: None,
            weights: None,
        }
    }

    /// Unlabelled matrix with generated ids, for synthetic data.
    pub fn from_array(values: Array2<f64>) -> Self {
        let columns = (0..values.ncols()).map(|j| format!("x{j}")).collect();
        FeatureMatrix {
            ids: (0..values.nrows()).map(|i| i.to_string()).collect(),
            columns,
            values,
            scaling: None,
            weights: None,
        }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    /// Writes `id,<column>...` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.values.row(i).iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("id") {
            return Err(Error::MissingColumn("id".into()));
        }
        let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        for row in rdr.records() {
            let row = row?;
            ids.push(row.get(0).unwrap_or("").to_string());
            for j in 0..columns.len() {
                let v: f64 = row
                    .get(j + 1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("bad value in row {}", ids.len())))?;
                flat.push(v);
            }
        }
        let values = Array2::from_shape_vec((ids.len(), columns.len()), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(FeatureMatrix {
            ids,
            columns,
            values,
            scaling: None,
            weights: None,
        })
    }
}

/// Z-scores every column with the population standard deviation.
pub fn standardize(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    let n = matrix.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "standardize needs at least 2 rows, got {n}"
        )));
    }
    let mut values = matrix.values.clone();
    let mut scaling = Vec::with_capacity(values.ncols());
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if !(sd > 1e-12 * mean.abs()) || sd == 0.0 {
            return Err(Error::ConstantColumn(matrix.columns[j].clone()));
        }
        col.mapv_inplace(|v| (v - mean) / sd);
        scaling.push(ColumnScaling { mean, sd });
    }
    Ok(FeatureMatrix {
        ids: matrix.ids.clone(),
        columns: matrix.columns.clone(),
        values,
        scaling: Some(scaling),
        weights: None,
    })
}

/// Multiplies column `j` of a standardized matrix by its weight.
pub fn apply_weights(matrix: &FeatureMatrix, weights: &FeatureWeights) -> Result<FeatureMatrix> {
    weights.validate()?;
    if matrix.scaling.is_none() {
        return Err(Error::InvalidWeights("matrix must be standardized first".into()));
    }
    if matrix.values.ncols() != 3 {
        return Err(Error::InvalidWeights(format!(
            "expected 3 feature columns, got {}",
            matrix.values.ncols()
        )));
    }
    let w = weights.as_array();
    let mut values = matrix.values.clone();
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        col.mapv_inplace(|v| v * w[j]);
    }
    Ok(FeatureMatrix {
        values,
        weights: Some(*weights),
        ..matrix.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub n: usize,
    /// Proportions in [`Outcome::ALL`] order.
    pub outcome: [f64; 3],
    /// Proportions of difficulty levels 1..=4.
    pub difficulty: [f64; 4],
    pub outcome_counts: [usize; 3],
    pub difficulty_counts: [usize; 4],
}

pub fn class_distribution(records: &[ChirpRecord]) -> Result<ClassDistribution> {
    if records.is_empty() {
        return Err(Error::InvalidInput("class_distribution of no records".into()));
    }
    let mut outcome_counts = [0usize; 3];
    let mut difficulty_counts = [0usize; 4];
    for r in records {
        let o = Outcome::ALL.iter().position(|o| *o == r.outcome).unwrap();
        outcome_counts[o] += 1;
        difficulty_counts[usize::from(r.difficulty - 1)] += 1;
    }
    let n = records.len();
    let frac = |c: usize| c as f64 / n as f64;
    Ok(ClassDistribution {
        n,
        outcome: outcome_counts.map(frac),
        difficulty: difficulty_counts.map(frac),
        outcome_counts,
        difficulty_counts,
    })
}
