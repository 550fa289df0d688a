//! Command-line driver.
//!
//! Each stage reads the previous stage's files from the output directory
//! and writes its own, so running the stages one by one produces the same
//! bytes as `pipeline`. Stage seeds are derived from the master seed and the
//! stage name.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{read_embedding, run_tsne, write_embedding, Embedding, EmbeddingSidecar, TsneConfig};
use crate::error::{Error, Result};
use crate::eval::{encode_scenario, run_all_scenarios, EvalReport, EvalSettings, Scenario};
use crate::explain::{
    build_sensitivity_map, fit_coordinate_regressors, read_sensitivity, write_sensitivity, CombineRule,
    SensitivityMap, SensitivitySidecar,
};
use crate::ingest::{
    apply_weights, class_distribution, load_records, read_records, standardize, subsample, write_records,
    ChirpRecord, ClassDistribution, ColumnScaling, FeatureMatrix, FeatureWeights, Outcome, Schema,
};
use crate::learners::{ClassifierConfigs, ClassifierKind, LabeledPoints, RandomForestConfig, TrainedModel};
use crate::render::{
    binary_classes, difficulty_bars, difficulty_classes, outcome_bars, outcome_classes, render_bars,
    render_boundary, render_confusion, render_labeled_embedding, render_metric_bars, render_sensitivity,
    PlotKind, PlotSpec,
};
use crate::seed::derive_seed;

pub const SYNTH_FILE: &str = "synth.csv";
pub const RECORDS_FILE: &str = "records.csv";
pub const REJECTIONS_FILE: &str = "rejections.txt";
pub const FEATURES_FILE: &str = "features.csv";
pub const INGEST_SUMMARY_FILE: &str = "ingest.json";
pub const EMBEDDING_FILE: &str = "embedding.csv";
pub const EMBEDDING_META_FILE: &str = "embedding.json";
pub const REPORT_FILE: &str = "eval_report.json";
pub const MODELS_DIR: &str = "models";
pub const SENSITIVITY_FILE: &str = "sensitivity.csv";
pub const SENSITIVITY_META_FILE: &str = "sensitivity.json";
pub const FIGURES_DIR: &str = "figures";
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelModel {
    /// Labels follow the cluster a row was drawn from.
    #[default]
    ClusterAligned,
    /// Labels drawn independently of the features.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_per_cluster: usize,
    pub n_clusters: usize,
    /// Distance between neighbouring cluster centres, in within-cluster
    /// standard deviations.
    pub separation: f64,
    pub labels: LabelModel,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_cluster: 50,
            n_clusters: 3,
            separation: 10.0,
            labels: LabelModel::ClusterAligned,
        }
    }
}

/// Which matrix the coordinate regressors learn from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorInput {
    /// The standardized, weighted matrix that was embedded.
    #[default]
    EmbeddingInput,
    /// Standardized features without weights.
    Standardized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub schema: Schema,
    /// Seeded subsample size applied after cleaning; `None` keeps every row.
    pub subsample: Option<usize>,
    pub weights: FeatureWeights,
    pub tsne: TsneConfig,
    pub classifiers: ClassifierConfigs,
    pub scenarios: Vec<Scenario>,
    pub classifier_kinds: Vec<ClassifierKind>,
    pub k_folds: usize,
    pub holdout_fraction: f64,
    pub regressor: RandomForestConfig,
    pub regressor_input: RegressorInput,
    pub combine: CombineRule,
    pub grid: usize,
    pub synth: SynthConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            schema: Schema::default(),
            subsample: None,
            weights: FeatureWeights::UNIT,
            tsne: TsneConfig::default(),
            classifiers: ClassifierConfigs::default(),
            scenarios: Scenario::ALL.to_vec(),
            classifier_kinds: ClassifierKind::ALL.to_vec(),
            k_folds: 5,
            holdout_fraction: 0.3,
            regressor: RandomForestConfig::default(),
            regressor_input: RegressorInput::EmbeddingInput,
            combine: CombineRule::Euclidean,
            grid: 300,
            synth: SynthConfig::default(),
            out_dir: PathBuf::from("out"),
            seed: 2024,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::InvalidConfig(format!("k_folds must be at least 2, got {}", self.k_folds)));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "holdout_fraction must be in (0, 1), got {}",
                self.holdout_fraction
            )));
        }
        if self.grid < 2 {
            return Err(Error::InvalidConfig("grid must be at least 2".into()));
        }
        if self.scenarios.is_empty() || self.classifier_kinds.is_empty() {
            return Err(Error::InvalidConfig("no scenario or no classifier selected".into()));
        }
        if self.subsample == Some(0) {
            return Err(Error::InvalidConfig("subsample must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the configuration with the output directory blanked, so
    /// the same run into two directories carries the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({ "config_sha256": self.hash(), "master_seed": self.seed })
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn svg_comment(&self) -> String {
        format!("chirp-atlas config_sha256={} master_seed={}", self.hash(), self.seed)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn open_artifact(path: &Path, what: &str) -> Result<fs::File> {
    if !path.exists() {
        return Err(Error::MissingArtifact(what.into()));
    }
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn read_json_artifact<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(open_artifact(path, what)?))?)
}

/// Seeded clusters in feature space with labels from `cfg.labels`.
pub fn synthesize(cfg: &SynthConfig, seed: u64) -> Result<Vec<ChirpRecord>> {
    if cfg.n_per_cluster == 0 || cfg.n_clusters == 0 {
        return Err(Error::InvalidConfig("synth needs at least one cluster and one row per cluster".into()));
    }
    if !(cfg.separation.is_finite() && cfg.separation >= 0.0) {
        return Err(Error::InvalidConfig(format!("separation must be finite and nonnegative, got {}", cfg.separation)));
    }
    // seconds, Hz, Hz
    let base = [5.0, 20.0, 10.0];
    let sigma = base.map(|b| 0.05 * b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(cfg.n_per_cluster * cfg.n_clusters);
    for c in 0..cfg.n_clusters {
        // cluster 0 at the base point, the rest out along the axes in rings
        let mut center = base;
        if c > 0 {
            let axis = (c - 1) % 3;
            let ring = (1 + (c - 1) / 3) as f64;
            center[axis] += cfg.separation * sigma[axis] * ring;
        }
        for _ in 0..cfg.n_per_cluster {
            let mut f = [0.0; 3];
            for k in 0..3 {
                f[k] = loop {
                    let z: f64 = rng.sample(StandardNormal);
                    let v = center[k] + sigma[k] * z;
                    if v > 0.0 {
                        break v;
                    }
                };
            }
            let (outcome, difficulty) = match cfg.labels {
                LabelModel::ClusterAligned => {
                    let outcome = Outcome::ALL[c % 3];
                    let low = rng.random_range(0..2u8);
                    let difficulty = if c % 3 == 0 { 1 + low } else { 3 + low };
                    (outcome, difficulty)
                }
                LabelModel::Random => (Outcome::ALL[rng.random_range(0..3)], rng.random_range(1..=4u8)),
            };
            records.push(ChirpRecord {
                id: format!("syn{:05}", records.len()),
                temporal_duration: f[0],
                frequency_onset: f[1],
                spectral_duration: f[2],
                outcome,
                difficulty,
            });
        }
    }
    Ok(records)
}

/// Writes `synth.csv` into the output directory and returns its path.
pub fn cmd_synth(cfg: &PipelineConfig) -> Result<PathBuf> {
    let run = || {
        let records = synthesize(&cfg.synth, cfg.stage_seed("synth"))?;
        let mut buf = Vec::new();
        write_records(&mut buf, &records)?;
        let path = cfg.path(SYNTH_FILE);
        write_file(&path, &buf)?;
        log::info!("synth: {} rows -> {}", records.len(), path.display());
        Ok(path)
    };
    run().map_err(|e: Error| e.in_stage("synth"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input: PathBuf,
    pub rows_read: usize,
    pub rows_rejected: usize,
    pub rows_kept: usize,
    pub subsample: Option<usize>,
    pub distribution: ClassDistribution,
    pub scaling: Vec<ColumnScaling>,
    pub weights: FeatureWeights,
    pub provenance: serde_json::Value,
}

/// Cleans the input, writes the kept records, the rejection report and the
/// standardized, weighted feature matrix.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<()> {
    let run = || {
        let input = cfg
            .input
            .clone()
            .ok_or_else(|| Error::InvalidConfig("no input file given".into()))?;
        let loaded = load_records(&input, &cfg.schema)?;
        let kept = match cfg.subsample {
            Some(n) => subsample(&loaded.records, n, cfg.stage_seed("subsample")),
            None => loaded.records.clone(),
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &kept)?;
        write_file(&cfg.path(RECORDS_FILE), &buf)?;
        write_file(&cfg.path(REJECTIONS_FILE), loaded.rejection_report().as_bytes())?;

        let matrix = apply_weights(&standardize(&FeatureMatrix::from_records(&kept))?, &cfg.weights)?;
        let mut buf = Vec::new();
        matrix.write_csv(&mut buf)?;
        write_file(&cfg.path(FEATURES_FILE), &buf)?;

        let summary = IngestSummary {
            input,
            rows_read: loaded.total_rows(),
            rows_rejected: loaded.rejections.len(),
            rows_kept: kept.len(),
            subsample: cfg.subsample,
            distribution: class_distribution(&kept)?,
            scaling: matrix.scaling.clone().unwrap_or_default(),
            weights: cfg.weights,
            provenance: cfg.provenance(),
        };
        write_json(&cfg.path(INGEST_SUMMARY_FILE), &summary)?;
        log::info!(
            "ingest: {} rows read, {} rejected, {} kept",
            summary.rows_read,
            summary.rows_rejected,
            summary.rows_kept
        );
        Ok(())
    };
    run().map_err(|e: Error| e.in_stage("ingest"))
}

fn load_clean_records(cfg: &PipelineConfig) -> Result<Vec<ChirpRecord>> {
    let file = open_artifact(&cfg.path(RECORDS_FILE), "records")?;
    Ok(read_records(file, &Schema::default())?.records)
}

fn load_features(cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(open_artifact(&cfg.path(FEATURES_FILE), "features")?)
}

fn load_embedding(cfg: &PipelineConfig) -> Result<Embedding> {
    let sidecar: EmbeddingSidecar = read_json_artifact(&cfg.path(EMBEDDING_META_FILE), "embedding")?;
    read_embedding(open_artifact(&cfg.path(EMBEDDING_FILE), "embedding")?, &sidecar)
}

fn check_aligned(a: &[String], b: &[String], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!("{what} ids do not match the ingested records")));
    }
    Ok(())
}

pub fn cmd_embed(cfg: &PipelineConfig) -> Result<()> {
    let run = || {
        let matrix = load_features(cfg)?;
        let tsne = TsneConfig {
            seed: cfg.stage_seed("embed"),
            ..cfg.tsne.clone()
        };
        let embedding = run_tsne(&matrix, &tsne)?;
        let mut buf = Vec::new();
        write_embedding(&mut buf, &embedding)?;
        write_file(&cfg.path(EMBEDDING_FILE), &buf)?;
        let mut sidecar = EmbeddingSidecar::of(&embedding);
        sidecar.provenance = Some(cfg.provenance());
        write_json(&cfg.path(EMBEDDING_META_FILE), &sidecar)?;
        log::info!("embed: {} points, final KL {:.4}", embedding.ids.len(), embedding.final_kl);
        Ok(())
    };
    run().map_err(|e: Error| e.in_stage("embed"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub provenance: serde_json::Value,
    pub scenario: Scenario,
    pub model: TrainedModel,
}

pub fn model_file(scenario: Scenario, kind: ClassifierKind) -> String {
    format!("{MODELS_DIR}/model_{}_{}.json", scenario.short(), kind.short())
}

pub fn cmd_eval(cfg: &PipelineConfig) -> Result<()> {
    let run = || {
        let embedding = load_embedding(cfg)?;
        let records = load_clean_records(cfg)?;
        let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
        check_aligned(&embedding.ids, &ids, "embedding")?;
        let settings = EvalSettings {
            scenarios: cfg.scenarios.clone(),
            classifiers: cfg.classifier_kinds.clone(),
            configs: cfg.classifiers.clone(),
            k_folds: cfg.k_folds,
            holdout_fraction: cfg.holdout_fraction,
            seed: cfg.stage_seed("eval"),
        };
        let (mut report, fitted) = run_all_scenarios(embedding.coords.view(), &records, &settings)?;
        report.provenance = Some(cfg.provenance());
        write_json(&cfg.path(REPORT_FILE), &report)?;
        for cell in fitted {
            let path = cfg.path(&model_file(cell.scenario, cell.model.kind));
            let artifact = ModelArtifact {
                provenance: cfg.provenance(),
                scenario: cell.scenario,
                model: cell.model,
            };
            write_json(&path, &artifact)?;
        }
        for (id, sc) in &report.scenarios {
            for (clf, cell) in &sc.classifiers {
                log::info!(
                    "eval: {id} {clf}: cv {:.3} ± {:.3}, hold-out F1 {:.3}",
                    cell.cv_accuracy_mean,
                    cell.cv_accuracy_sd,
                    cell.holdout.f1
                );
            }
        }
        Ok(())
    };
    run().map_err(|e: Error| e.in_stage("eval"))
}

pub fn cmd_explain(cfg: &PipelineConfig) -> Result<()> {
    let run = || {
        let embedding = load_embedding(cfg)?;
        let matrix = match cfg.regressor_input {
            RegressorInput::EmbeddingInput => load_features(cfg)?,
            RegressorInput::Standardized => standardize(&FeatureMatrix::from_records(&load_clean_records(cfg)?))?,
        };
        check_aligned(&embedding.ids, &matrix.ids, "feature")?;
        let forest = RandomForestConfig {
            seed: cfg.stage_seed("explain"),
            ..cfg.regressor.clone()
        };
        let regressors = fit_coordinate_regressors(matrix.values.view(), embedding.coords.view(), &forest)?;
        let map = build_sensitivity_map(&regressors, &matrix, cfg.combine)?;
        let mut buf = Vec::new();
        write_sensitivity(&mut buf, &map)?;
        write_file(&cfg.path(SENSITIVITY_FILE), &buf)?;
        let mut sidecar = SensitivitySidecar::of(&map, &regressors);
        sidecar.provenance = Some(cfg.provenance());
        write_json(&cfg.path(SENSITIVITY_META_FILE), &sidecar)?;
        log::info!("explain: R² x {:.3}, y {:.3}", regressors.r2[0], regressors.r2[1]);
        Ok(())
    };
    run().map_err(|e: Error| e.in_stage("explain"))
}

fn load_sensitivity(cfg: &PipelineConfig) -> Result<SensitivityMap> {
    let sidecar: SensitivitySidecar = read_json_artifact(&cfg.path(SENSITIVITY_META_FILE), "sensitivity")?;
    read_sensitivity(open_artifact(&cfg.path(SENSITIVITY_FILE), "sensitivity")?, &sidecar)
}

/// File names of every figure `cmd_render` writes for this configuration,
/// relative to the output directory.
pub fn expected_figures(cfg: &PipelineConfig, features: &[String]) -> Vec<String> {
    let mut names = vec![
        "fig_bars_outcome.svg".to_string(),
        "fig_bars_difficulty.svg".to_string(),
        "fig_scatter_outcome.svg".to_string(),
        "fig_scatter_difficulty.svg".to_string(),
    ];
    for &s in &cfg.scenarios {
        for &k in &cfg.classifier_kinds {
            names.push(format!("fig_boundary_{}_{}.svg", s.short(), k.short()));
        }
        names.push(format!("fig_confusion_{}.svg", s.short()));
        names.push(format!("fig_metrics_{}.svg", s.short()));
    }
    for f in features {
        names.push(format!("fig_sensitivity_{f}.svg"));
    }
    names.into_iter().map(|n| format!("{FIGURES_DIR}/{n}")).collect()
}

pub fn cmd_render(cfg: &PipelineConfig) -> Result<()> {
    let run = || {
        let embedding = load_embedding(cfg)?;
        let records = load_clean_records(cfg)?;
        let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
        check_aligned(&embedding.ids, &ids, "embedding")?;
        let report: EvalReport = read_json_artifact(&cfg.path(REPORT_FILE), "eval report")?;
        let map = load_sensitivity(cfg)?;
        check_aligned(&map.ids, &ids, "sensitivity")?;

        let comment = cfg.svg_comment();
        let spec = |kind: PlotKind, title: String| PlotSpec {
            grid: cfg.grid,
            comment: Some(comment.clone()),
            ..PlotSpec::new(kind, title)
        };
        let fig = |name: &str| cfg.path(&format!("{FIGURES_DIR}/{name}"));
        let coords = embedding.coords.view();

        let dist = class_distribution(&records)?;
        let outcome_spec = spec(PlotKind::Bars, "Outcome distribution".into());
        write_file(&fig("fig_bars_outcome.svg"), render_bars(&outcome_bars(&dist), &outcome_spec)?.as_bytes())?;
        let difficulty_spec = spec(PlotKind::Bars, "Difficulty distribution".into());
        write_file(
            &fig("fig_bars_difficulty.svg"),
            render_bars(&difficulty_bars(&dist), &difficulty_spec)?.as_bytes(),
        )?;

        let outcome_idx: Vec<usize> = records
            .iter()
            .map(|r| Outcome::ALL.iter().position(|o| *o == r.outcome).unwrap_or(0))
            .collect();
        let svg = render_labeled_embedding(
            coords,
            &outcome_idx,
            &outcome_classes(),
            &spec(PlotKind::Scatter, "t-SNE embedding by outcome".into()),
        )?;
        write_file(&fig("fig_scatter_outcome.svg"), svg.as_bytes())?;
        let difficulty_idx: Vec<usize> = records.iter().map(|r| usize::from(r.difficulty - 1)).collect();
        let svg = render_labeled_embedding(
            coords,
            &difficulty_idx,
            &difficulty_classes(),
            &spec(PlotKind::Scatter, "t-SNE embedding by difficulty".into()),
        )?;
        write_file(&fig("fig_scatter_difficulty.svg"), svg.as_bytes())?;

        for &scenario in &cfg.scenarios {
            let sc_report = report
                .scenarios
                .get(scenario.id())
                .ok_or_else(|| Error::MissingArtifact(format!("{} report", scenario.id())))?;
            let points = LabeledPoints::new(embedding.coords.clone(), encode_scenario(&records, scenario).labels)?;
            let names = binary_classes(scenario).map_names();
            let mut confusions = Vec::new();
            for &kind in &cfg.classifier_kinds {
                let art: ModelArtifact = read_json_artifact(
                    &cfg.path(&model_file(scenario, kind)),
                    &format!("{} {} model", scenario.short(), kind.short()),
                )?;
                let boundary_spec = PlotSpec {
                    class_names: Some(names.clone()),
                    ..spec(PlotKind::Boundary, format!("{} decision boundary, {}", kind.label(), scenario.id()))
                };
                let svg = render_boundary(&art.model, &points, &boundary_spec)?;
                write_file(&fig(&format!("fig_boundary_{}_{}.svg", scenario.short(), kind.short())), svg.as_bytes())?;
                if let Some(cell) = sc_report.classifiers.get(kind.short()) {
                    confusions.push((kind.label().to_string(), cell.holdout.confusion));
                }
            }
            let svg = render_confusion(
                &confusions,
                &PlotSpec {
                    width: 260 * confusions.len().max(1) as u32 + 90,
                    height: 360,
                    ..spec(PlotKind::Confusion, format!("Hold-out confusion matrices, {}", scenario.id()))
                },
            )?;
            write_file(&fig(&format!("fig_confusion_{}.svg", scenario.short())), svg.as_bytes())?;
            let svg = render_metric_bars(
                sc_report,
                &PlotSpec {
                    width: 900,
                    ..spec(PlotKind::Bars, format!("Classifier metrics, {}", scenario.id()))
                },
            )?;
            write_file(&fig(&format!("fig_metrics_{}.svg", scenario.short())), svg.as_bytes())?;
        }

        for (j, feature) in map.features.iter().enumerate() {
            let svg = render_sensitivity(
                coords,
                &map,
                j,
                &spec(PlotKind::Sensitivity, format!("Sensitivity to {feature}")),
            )?;
            write_file(&fig(&format!("fig_sensitivity_{feature}.svg")), svg.as_bytes())?;
        }
        log::info!("render: figures in {}", cfg.path(FIGURES_DIR).display());
        Ok(())
    };
    run().map_err(|e: Error| e.in_stage("render"))
}

trait MapNames {
    fn map_names(self) -> [String; 2];
}

impl MapNames for Vec<crate::render::ClassStyle> {
    fn map_names(self) -> [String; 2] {
        [self[0].name.clone(), self[1].name.clone()]
    }
}

/// Runs every stage in order. On failure a `FAILED` file naming the stage
/// and cause is left next to whatever was already written.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<()> {
    let marker = cfg.path(FAILED_MARKER);
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    let result = cmd_ingest(cfg)
        .and_then(|_| cmd_embed(cfg))
        .and_then(|_| cmd_eval(cfg))
        .and_then(|_| cmd_explain(cfg))
        .and_then(|_| cmd_render(cfg));
    if let Err(e) = &result {
        write_file(&marker, format!("{e}\n").as_bytes())?;
    }
    result
}

#[derive(Debug, Parser)]
#[command(name = "chirp-atlas", version, about = "Embed, classify and explain chirp feature data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Feature weights as temporal,frequency,spectral.
    #[arg(long, global = true)]
    weights: Option<String>,
    /// s1, s2, s3 or all (comma-separated lists accepted).
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// rf, svm, logreg, knn or all (comma-separated lists accepted).
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// Input table for `ingest` and `pipeline`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic clustered dataset.
    Synth {
        #[arg(long)]
        n_per_cluster: Option<usize>,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
        /// aligned or random
        #[arg(long)]
        labels: Option<String>,
    },
    Ingest,
    Embed,
    Eval,
    Explain,
    Render,
    Pipeline,
}

fn parse_selection<T: Copy + std::str::FromStr<Err = Error>>(s: &str, all: &[T]) -> Result<Vec<T>> {
    if s == "all" {
        return Ok(all.to_vec());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

fn resolve_config(common: &CommonArgs) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(w) = &common.weights {
        cfg.weights = w.parse()?;
    }
    if let Some(s) = &common.scenario {
        cfg.scenarios = parse_selection(s, &Scenario::ALL)?;
    }
    if let Some(c) = &common.classifier {
        cfg.classifier_kinds = parse_selection(c, &ClassifierKind::ALL)?;
    }
    if let Some(input) = &common.input {
        cfg.input = Some(input.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli.common)?;
    match cli.command {
        Command::Synth {
            n_per_cluster,
            clusters,
            separation,
            labels,
        } => {
            if let Some(n) = n_per_cluster {
                cfg.synth.n_per_cluster = n;
            }
            if let Some(k) = clusters {
                cfg.synth.n_clusters = k;
            }
            if let Some(s) = separation {
                cfg.synth.separation = s;
            }
            if let Some(l) = labels {
                cfg.synth.labels = match l.as_str() {
                    "aligned" => LabelModel::ClusterAligned,
                    "random" => LabelModel::Random,
                    other => return Err(Error::InvalidConfig(format!("unknown label model `{other}`"))),
                };
            }
            let path = cmd_synth(&cfg)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Ingest => cmd_ingest(&cfg),
        Command::Embed => cmd_embed(&cfg),
        Command::Eval => cmd_eval(&cfg),
        Command::Explain => cmd_explain(&cfg),
        Command::Render => cmd_render(&cfg),
        Command::Pipeline => cmd_pipeline(&cfg),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}
