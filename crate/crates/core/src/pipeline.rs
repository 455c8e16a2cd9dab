//! Experiment orchestration: train/test split, model training and evaluation, sweeps
//! over feature and model configurations, model files, run manifests and inference.
//!
//! A sweep writes, under its output directory:
//!
//! - `reports/<run>.json`: one [`RunReport`] per trained model (and pooled cell-specific
//!   summaries),
//! - `cdf/<run>.csv`: test-error CDF as `error_m,fraction`,
//! - `models/<run>.json`: the trained [`ModelFile`],
//! - `summary.txt`: comparison table,
//! - `manifest.json`: everything needed to replay the sweep.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dtree::{self, TreeConfig, TreeModel};
use crate::error::{Error, Result};
use crate::eval::{self, compare, EvalReport, SplitTag};
use crate::features::{extract, extract_all, FeatureConfig, FeatureVector, OneHotSpace, SkipCounts, Topology};
use crate::fingerprint::{
    self, build_dataset_with, los_filter, partition_by_cell, select_serving, sort_measurements,
    Dataset, DatasetOptions, FingerprintRecord, Measurement,
};
use crate::mlp::{self, MlpConfig, MlpModel, TrainReport};
use crate::scenario::{build_scenario, config_hash, Scenario, ScenarioConfig};

/// Seeded uniform shuffle followed by a prefix split; `round(fraction * n)` items train.
pub fn split<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = items.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Data(format!(
            "splitting {n} items at {train_fraction} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Regressor family and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Mlp(MlpConfig),
    Tree(TreeConfig),
}

impl ModelSpec {
    /// File-name-safe tag, e.g. `mlp-64x64-tanh` or `tree-d30-l2`.
    pub fn tag(&self) -> String {
        match self {
            ModelSpec::Mlp(c) => {
                let widths: Vec<String> = c.hidden_layer_widths.iter().map(|w| w.to_string()).collect();
                let act = match c.hidden_activation {
                    mlp::Activation::Tanh => "tanh",
                    mlp::Activation::Relu => "relu",
                };
                format!("mlp-{}-{act}", widths.join("x"))
            }
            ModelSpec::Tree(c) => format!("tree-d{}-l{}", c.max_depth, c.min_samples_leaf),
        }
    }

    pub fn is_mlp(&self) -> bool {
        matches!(self, ModelSpec::Mlp(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Mlp(c) => c.validate(),
            ModelSpec::Tree(c) => c.validate(),
        }
    }
}

/// A fitted regressor. The MLP carries its normaliser; the tree works on raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Mlp(MlpModel),
    Tree(TreeModel),
}

impl TrainedModel {
    pub fn predict(&self, features: &[f64]) -> Result<[f64; 2]> {
        match self {
            TrainedModel::Mlp(m) => m.predict(features),
            TrainedModel::Tree(t) => t.predict(features),
        }
    }

    pub fn predict_batch(&self, vectors: &[FeatureVector]) -> Result<Vec<[f64; 2]>> {
        match self {
            TrainedModel::Mlp(m) => m.predict_batch(vectors),
            TrainedModel::Tree(t) => t.predict_batch(vectors),
        }
    }
}

pub fn train_model(spec: &ModelSpec, train: &[FeatureVector]) -> Result<(TrainedModel, Option<TrainReport>)> {
    match spec {
        ModelSpec::Mlp(cfg) => {
            let (m, report) = mlp::fit(cfg, train)?;
            Ok((TrainedModel::Mlp(m), Some(report)))
        }
        ModelSpec::Tree(cfg) => Ok((TrainedModel::Tree(dtree::fit(train, cfg)?), None)),
    }
}

/// Per-sample errors of `model` on `vectors`, plus their summary.
pub fn evaluate_model(
    model: &TrainedModel,
    vectors: &[FeatureVector],
    split: SplitTag,
    descriptor: &str,
) -> Result<(EvalReport, Vec<f64>)> {
    let predictions = model.predict_batch(vectors)?;
    let labels: Vec<[f64; 2]> = vectors.iter().map(|v| v.label).collect();
    let errors = eval::euclidean_errors(&predictions, &labels)?;
    Ok((eval::summarize(&errors)?.tagged(split, descriptor), errors))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub train_fraction: f64,
    pub seed: u64,
}

pub const MODEL_FORMAT: &str = "beamprint-model";
pub const MODEL_VERSION: u32 = 1;

/// Versioned JSON model file: the regressor plus everything needed to feed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub features: FeatureConfig,
    /// Serving cell a cell-specific model was trained for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<u32>,
    pub scenario_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitInfo>,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(
        features: FeatureConfig,
        cell: Option<u32>,
        scenario_hash: impl Into<String>,
        split: Option<SplitInfo>,
        model: TrainedModel,
    ) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            features,
            cell,
            scenario_hash: scenario_hash.into(),
            split,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            field: "model".into(),
            message: e.to_string(),
        })?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model file {} v{}",
                file.format, file.version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Records this model applies to: LoS records, restricted to its cell if cell-specific.
    pub fn applicable<'a>(&self, records: &'a [FingerprintRecord]) -> Vec<&'a FingerprintRecord> {
        records
            .iter()
            .filter(|r| r.los_to_serving && self.cell.is_none_or(|c| r.serving_cell_id == c))
            .collect()
    }
}

/// Which serving cells a cell-specific sweep trains models for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSelection {
    /// `"all"` or `"largest"`.
    Named(CellSelector),
    Ids(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellSelector {
    All,
    /// The cell with the most LoS records.
    Largest,
}

impl Default for CellSelection {
    fn default() -> Self {
        CellSelection::Named(CellSelector::All)
    }
}

/// One sweep: scenario, dataset options, split, feature and model grids, outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    /// Scenario file; the built-in default scenario when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    /// Prebuilt dataset; generated from the scenario when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_seed: Option<u64>,
    #[serde(default = "default_beams_per_cell")]
    pub beams_per_cell: usize,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default)]
    pub cells: CellSelection,
    #[serde(default = "default_min_cell_records")]
    pub min_cell_records: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub one_hot_ids: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub features: Vec<FeatureConfig>,
    pub models: Vec<ModelSpec>,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_beams_per_cell() -> usize {
    4
}
fn default_topology() -> Topology {
    Topology::NetworkLevel
}
fn default_min_cell_records() -> usize {
    50
}
fn default_train_fraction() -> f64 {
    0.9
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentSpec {
    pub fn new(features: Vec<FeatureConfig>, models: Vec<ModelSpec>) -> Self {
        ExperimentSpec {
            name: default_name(),
            scenario: None,
            dataset: None,
            dataset_seed: None,
            beams_per_cell: default_beams_per_cell(),
            topology: default_topology(),
            cells: CellSelection::default(),
            min_cell_records: default_min_cell_records(),
            train_fraction: default_train_fraction(),
            split_seed: 0,
            one_hot_ids: false,
            output_dir: default_output_dir(),
            features,
            models,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("experiment spec: {e}")))
    }

    /// Reads a spec file; relative paths inside it resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        spec.scenario.as_mut().map(rebase);
        spec.dataset.as_mut().map(rebase);
        rebase(&mut spec.output_dir);
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("experiment encode: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        if self.features.is_empty() || self.models.is_empty() {
            return Err(Error::Config(
                "experiment needs at least one feature config and one model".into(),
            ));
        }
        if self.beams_per_cell == 0 {
            return Err(Error::Config("beams_per_cell must be at least 1".into()));
        }
        for f in &self.features {
            f.for_topology(self.topology).validate()?;
            if f.n_serving_beams > self.beams_per_cell {
                return Err(Error::Config(format!(
                    "{} serving beams requested but only {} stored per cell",
                    f.n_serving_beams, self.beams_per_cell
                )));
            }
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n_samples: usize,
    pub mean_error_m: f64,
    pub std_error_m: f64,
}

/// Everything reported for one trained model (or one pooled cell-specific group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub id: String,
    pub topology: Topology,
    /// Serving cell for cell-specific runs; absent for network-level and pooled reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<u32>,
    /// Cells aggregated into a pooled report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pooled_cells: Vec<u32>,
    pub features: FeatureConfig,
    pub model: ModelSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub skipped_train: SkipCounts,
    pub skipped_test: SkipCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainReport>,
    pub train: EvalReport,
    pub test: EvalReport,
    /// Test error broken down by serving cell.
    pub test_by_cell: BTreeMap<u32, CellSummary>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub report: PathBuf,
    pub cdf: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<u32>,
    pub feature_tag: String,
    pub model_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_seed: Option<u64>,
    pub artifacts: ArtifactPaths,
    pub duration_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub seed: u64,
    pub records: usize,
    pub los_records: usize,
    pub los_fraction: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub cell: u32,
    pub train_records: usize,
    pub test_records: usize,
    pub reason: String,
}

/// Full provenance of a sweep. `spec` and `scenario` are enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub name: String,
    pub spec: ExperimentSpec,
    pub spec_sha256: String,
    pub scenario: ScenarioConfig,
    pub scenario_hash: String,
    pub dataset: DatasetInfo,
    pub split: SplitInfo,
    pub n_train_records: usize,
    pub n_test_records: usize,
    pub runs: Vec<ManifestRun>,
    pub skipped_cells: Vec<SkippedCell>,
    pub summary: PathBuf,
    pub total_duration_ms: u128,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            field: "manifest".into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<RunReport>,
    pub manifest: RunManifest,
}

impl ExperimentOutcome {
    pub fn report(&self, id: &str) -> Option<&RunReport> {
        self.reports.iter().find(|r| r.id == id)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn dataset_digest(ds: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    fingerprint::write_dataset(ds, &mut buf)?;
    Ok(sha256_hex(&buf))
}

struct RunPlan {
    cell: Option<u32>,
    features: FeatureConfig,
    model: ModelSpec,
    train: Vec<FingerprintRecord>,
    test: Vec<FingerprintRecord>,
}

impl RunPlan {
    fn id(&self) -> String {
        let scope = match self.cell {
            Some(c) => format!("cell{c}"),
            None => "net".into(),
        };
        format!("{scope}__{}__{}", feature_tag(&self.features), self.model.tag())
    }
}

/// File-name-safe feature tag, e.g. `s3n2-id`.
pub fn feature_tag(f: &FeatureConfig) -> String {
    format!(
        "s{}n{}{}{}",
        f.n_serving_beams,
        f.n_neighbor_beams,
        if f.include_serving_cell_id { "-id" } else { "" },
        if f.one_hot.is_some() { "-onehot" } else { "" }
    )
}

struct RunOutput {
    report: RunReport,
    model: TrainedModel,
    train_errors: Vec<f64>,
    test_errors: Vec<f64>,
    duration_ms: u128,
}

fn per_cell(errors: &[f64], cells: &[u32]) -> Result<BTreeMap<u32, CellSummary>> {
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (&e, &c) in errors.iter().zip(cells) {
        groups.entry(c).or_default().push(e);
    }
    groups
        .into_iter()
        .map(|(c, errs)| {
            let s = eval::summarize(&errs)?;
            Ok((
                c,
                CellSummary {
                    n_samples: s.n_samples,
                    mean_error_m: s.mean_error_m,
                    std_error_m: s.std_error_m,
                },
            ))
        })
        .collect()
}

fn execute(plan: &RunPlan, topology: Topology) -> Result<RunOutput> {
    let start = Instant::now();
    let id = plan.id();
    let train = extract_all(&plan.train, &plan.features);
    let test = extract_all(&plan.test, &plan.features);
    if train.vectors.len() < 2 || test.vectors.is_empty() {
        return Err(Error::Data(format!(
            "run {id}: too few usable records after feature extraction ({} train, {} test)",
            train.vectors.len(),
            test.vectors.len()
        )));
    }
    let (model, training) = train_model(&plan.model, &train.vectors)?;
    let (train_eval, train_errors) = evaluate_model(&model, &train.vectors, SplitTag::Train, &id)?;
    let (test_eval, test_errors) = evaluate_model(&model, &test.vectors, SplitTag::Test, &id)?;
    let test_cells: Vec<u32> = test.kept.iter().map(|&i| plan.test[i].serving_cell_id).collect();
    let report = RunReport {
        id,
        topology,
        cell: plan.cell,
        pooled_cells: vec![],
        features: plan.features.clone(),
        model: plan.model.clone(),
        n_train: train.vectors.len(),
        n_test: test.vectors.len(),
        skipped_train: train.skipped,
        skipped_test: test.skipped,
        training,
        train: train_eval,
        test: test_eval,
        test_by_cell: per_cell(&test_errors, &test_cells)?,
    };
    Ok(RunOutput {
        report,
        model,
        train_errors,
        test_errors,
        duration_ms: start.elapsed().as_millis(),
    })
}

fn resolve_features(spec: &ExperimentSpec, scenario: &Scenario) -> Vec<FeatureConfig> {
    spec.features
        .iter()
        .map(|f| {
            let mut f = f.for_topology(spec.topology);
            if spec.one_hot_ids {
                f.one_hot = Some(OneHotSpace {
                    cell_ids: scenario.cells().iter().map(|c| c.cell_id).collect(),
                    n_beams: scenario.codebook().len() as u32,
                });
            }
            f
        })
        .collect()
}

/// Loads the spec's scenario (or the default one) and its dataset.
fn prepare(spec: &ExperimentSpec, scenario_config: ScenarioConfig) -> Result<(Scenario, Dataset, String)> {
    let scenario = build_scenario(scenario_config)?;
    let (dataset, source) = match &spec.dataset {
        Some(path) => {
            let ds = fingerprint::load_for_scenario(path, &scenario)?;
            (ds, path.display().to_string())
        }
        None => (
            build_dataset_with(
                &scenario,
                &DatasetOptions {
                    seed: spec.dataset_seed,
                    beams_per_cell: Some(spec.beams_per_cell),
                },
            )?,
            "generated".to_string(),
        ),
    };
    Ok((scenario, dataset, source))
}

/// Runs a sweep and writes its artifacts under `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let scenario_config = match &spec.scenario {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    run_experiment_with(spec, scenario_config)
}

/// Re-runs the sweep recorded in a manifest, writing into `output_dir`.
pub fn replay(manifest: &RunManifest, output_dir: impl Into<PathBuf>) -> Result<ExperimentOutcome> {
    let mut spec = manifest.spec.clone();
    spec.output_dir = output_dir.into();
    if config_hash(&manifest.scenario) != manifest.scenario_hash {
        return Err(Error::Validation("manifest scenario does not match its hash".into()));
    }
    let outcome = run_experiment_with(&spec, manifest.scenario.clone())?;
    if outcome.manifest.dataset.sha256 != manifest.dataset.sha256 {
        return Err(Error::Validation(
            "replayed dataset differs from the recorded one".into(),
        ));
    }
    Ok(outcome)
}

pub fn run_experiment_with(spec: &ExperimentSpec, scenario_config: ScenarioConfig) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    spec.validate()?;
    let (scenario, dataset, source) = prepare(spec, scenario_config)?;
    let los = los_filter(&dataset)?;
    let (train_recs, test_recs) = split(&los.records, spec.train_fraction, spec.split_seed)?;
    let features = resolve_features(spec, &scenario);

    let mut plans = Vec::new();
    let mut skipped_cells = Vec::new();
    match spec.topology {
        Topology::NetworkLevel => {
            for f in &features {
                for m in &spec.models {
                    plans.push(RunPlan {
                        cell: None,
                        features: f.clone(),
                        model: m.clone(),
                        train: train_recs.clone(),
                        test: test_recs.clone(),
                    });
                }
            }
        }
        Topology::CellSpecific => {
            let group = |recs: &[FingerprintRecord]| {
                let mut out: BTreeMap<u32, Vec<FingerprintRecord>> = BTreeMap::new();
                for r in recs {
                    out.entry(r.serving_cell_id).or_default().push(r.clone());
                }
                out
            };
            let train_by_cell = group(&train_recs);
            let test_by_cell = group(&test_recs);
            let sizes: BTreeMap<u32, usize> =
                partition_by_cell(&los).iter().map(|(c, d)| (*c, d.len())).collect();
            let chosen: Vec<u32> = match &spec.cells {
                CellSelection::Named(CellSelector::All) => sizes.keys().copied().collect(),
                CellSelection::Named(CellSelector::Largest) => sizes
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(c, _)| vec![*c])
                    .unwrap_or_default(),
                CellSelection::Ids(ids) => ids.clone(),
            };
            for cell in chosen {
                let tr = train_by_cell.get(&cell).cloned().unwrap_or_default();
                let te = test_by_cell.get(&cell).cloned().unwrap_or_default();
                if tr.len() < spec.min_cell_records.max(2) || te.is_empty() {
                    log::warn!(
                        "skipping cell {cell}: {} train / {} test records (minimum {})",
                        tr.len(),
                        te.len(),
                        spec.min_cell_records
                    );
                    skipped_cells.push(SkippedCell {
                        cell,
                        train_records: tr.len(),
                        test_records: te.len(),
                        reason: "too few records".into(),
                    });
                    continue;
                }
                for f in &features {
                    for m in &spec.models {
                        plans.push(RunPlan {
                            cell: Some(cell),
                            features: f.clone(),
                            model: m.clone(),
                            train: tr.clone(),
                            test: te.clone(),
                        });
                    }
                }
            }
        }
    }
    if plans.is_empty() {
        return Err(Error::Data("no trainable runs in this experiment".into()));
    }
    let outputs: Vec<RunOutput> = plans
        .par_iter()
        .map(|p| execute(p, spec.topology))
        .collect::<Result<Vec<_>>>()?;

    let mut reports: Vec<RunReport> = outputs.iter().map(|o| o.report.clone()).collect();
    if spec.topology == Topology::CellSpecific {
        reports.extend(pooled_reports(&plans, &outputs)?);
    }

    // single writer for every artifact
    let out_dir = &spec.output_dir;
    for sub in ["reports", "cdf", "models"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let write = |path: &Path, contents: &str| fs::write(path, contents).map_err(|e| Error::io(path, e));
    let split_info = SplitInfo {
        train_fraction: spec.train_fraction,
        seed: spec.split_seed,
    };
    let mut runs = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        let rel_report = PathBuf::from("reports").join(format!("{}.json", report.id));
        let rel_cdf = PathBuf::from("cdf").join(format!("{}.csv", report.id));
        write(&out_dir.join(&rel_report), &report.to_json())?;
        write(&out_dir.join(&rel_cdf), &report.test.cdf_csv())?;
        let (rel_model, duration_ms) = match outputs.get(i) {
            Some(o) => {
                let rel = PathBuf::from("models").join(format!("{}.json", report.id));
                let file = ModelFile::new(
                    report.features.clone(),
                    report.cell,
                    scenario.hash(),
                    Some(split_info),
                    o.model.clone(),
                );
                write(&out_dir.join(&rel), &file.to_json())?;
                (Some(rel), o.duration_ms)
            }
            None => (None, 0),
        };
        runs.push(ManifestRun {
            id: report.id.clone(),
            cell: report.cell,
            feature_tag: feature_tag(&report.features),
            model_tag: report.model.tag(),
            model_seed: match &report.model {
                ModelSpec::Mlp(c) => Some(c.rng_seed),
                ModelSpec::Tree(_) => None,
            },
            artifacts: ArtifactPaths {
                report: rel_report,
                cdf: rel_cdf,
                model: rel_model,
            },
            duration_ms,
        });
    }
    let tests: Vec<EvalReport> = reports.iter().map(|r| r.test.clone()).collect();
    let summary = if tests.len() >= 2 {
        compare(&tests)?.to_string()
    } else {
        format!("{:#?}\n", tests[0])
    };
    write(&out_dir.join("summary.txt"), &summary)?;

    let spec_text = spec.to_toml_string()?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        name: spec.name.clone(),
        spec: spec.clone(),
        spec_sha256: sha256_hex(spec_text.as_bytes()),
        scenario: scenario.config().clone(),
        scenario_hash: scenario.hash().to_string(),
        dataset: DatasetInfo {
            source,
            seed: dataset.seed,
            records: dataset.len(),
            los_records: los.len(),
            los_fraction: dataset.los_fraction(),
            sha256: dataset_digest(&dataset)?,
        },
        split: split_info,
        n_train_records: train_recs.len(),
        n_test_records: test_recs.len(),
        runs,
        skipped_cells,
        summary: PathBuf::from("summary.txt"),
        total_duration_ms: started.elapsed().as_millis(),
    };
    write(
        &out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(ExperimentOutcome { reports, manifest })
}

/// Concatenates the errors of every cell for each (feature, model) pair.
fn pooled_reports(plans: &[RunPlan], outputs: &[RunOutput]) -> Result<Vec<RunReport>> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for p in plans {
        let k = (feature_tag(&p.features), p.model.tag());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = Vec::new();
    for (ftag, mtag) in keys {
        let members: Vec<(&RunPlan, &RunOutput)> = plans
            .iter()
            .zip(outputs)
            .filter(|(p, _)| feature_tag(&p.features) == ftag && p.model.tag() == mtag)
            .collect();
        let id = format!("pooled__{ftag}__{mtag}");
        let train_errors: Vec<f64> = members.iter().flat_map(|(_, o)| o.train_errors.clone()).collect();
        let test_errors: Vec<f64> = members.iter().flat_map(|(_, o)| o.test_errors.clone()).collect();
        let cells: BTreeSet<u32> = members.iter().filter_map(|(p, _)| p.cell).collect();
        let mut skipped_train = SkipCounts::default();
        let mut skipped_test = SkipCounts::default();
        for (_, o) in &members {
            skipped_train.insufficient_serving_beams += o.report.skipped_train.insufficient_serving_beams;
            skipped_train.insufficient_neighbor_cells += o.report.skipped_train.insufficient_neighbor_cells;
            skipped_train.unknown_id += o.report.skipped_train.unknown_id;
            skipped_test.insufficient_serving_beams += o.report.skipped_test.insufficient_serving_beams;
            skipped_test.insufficient_neighbor_cells += o.report.skipped_test.insufficient_neighbor_cells;
            skipped_test.unknown_id += o.report.skipped_test.unknown_id;
        }
        let first = members[0];
        out.push(RunReport {
            id: id.clone(),
            topology: Topology::CellSpecific,
            cell: None,
            pooled_cells: cells.into_iter().collect(),
            features: first.0.features.clone(),
            model: first.0.model.clone(),
            n_train: train_errors.len(),
            n_test: test_errors.len(),
            skipped_train,
            skipped_test,
            training: None,
            train: eval::summarize(&train_errors)?.tagged(SplitTag::Train, &id),
            test: eval::summarize(&test_errors)?.tagged(SplitTag::Test, &id),
            test_by_cell: members
                .iter()
                .filter_map(|(p, o)| {
                    Some((
                        p.cell?,
                        CellSummary {
                            n_samples: o.report.test.n_samples,
                            mean_error_m: o.report.test.mean_error_m,
                            std_error_m: o.report.test.std_error_m,
                        },
                    ))
                })
                .collect(),
        });
    }
    Ok(out)
}

/// LoS records of `dataset` split exactly as a sweep splits them, then restricted to
/// `cell` when given.
pub fn split_records(
    dataset: &Dataset,
    split_info: SplitInfo,
    cell: Option<u32>,
) -> Result<(Vec<FingerprintRecord>, Vec<FingerprintRecord>)> {
    let los = los_filter(dataset)?;
    let (train, test) = split(&los.records, split_info.train_fraction, split_info.seed)?;
    let keep = |recs: Vec<FingerprintRecord>| -> Vec<FingerprintRecord> {
        recs.into_iter()
            .filter(|r| cell.is_none_or(|c| r.serving_cell_id == c))
            .collect()
    };
    let (train, test) = (keep(train), keep(test));
    if train.len() < 2 || test.is_empty() {
        return Err(Error::Data(format!(
            "too few LoS records for training ({} train, {} test)",
            train.len(),
            test.len()
        )));
    }
    Ok((train, test))
}

#[derive(Debug, Clone)]
pub struct SingleRun {
    pub model: ModelFile,
    pub training: Option<TrainReport>,
    pub train: EvalReport,
    pub test: EvalReport,
}

/// Trains one model on the LoS records of `dataset` (one cell's records if `cell` is set,
/// in which case the cell-id feature is dropped) and evaluates it on both splits.
pub fn train_single(
    dataset: &Dataset,
    features: &FeatureConfig,
    model: &ModelSpec,
    split_info: SplitInfo,
    cell: Option<u32>,
) -> Result<SingleRun> {
    model.validate()?;
    let features = match cell {
        Some(_) => features.for_topology(Topology::CellSpecific),
        None => features.clone(),
    };
    features.validate()?;
    let (train_recs, test_recs) = split_records(dataset, split_info, cell)?;
    let train = extract_all(&train_recs, &features);
    let test = extract_all(&test_recs, &features);
    if train.vectors.len() < 2 || test.vectors.is_empty() {
        return Err(Error::Data("too few records carry the requested features".into()));
    }
    let (trained, training) = train_model(model, &train.vectors)?;
    let tag = format!("{}__{}", feature_tag(&features), model.tag());
    let (train_eval, _) = evaluate_model(&trained, &train.vectors, SplitTag::Train, &tag)?;
    let (test_eval, _) = evaluate_model(&trained, &test.vectors, SplitTag::Test, &tag)?;
    Ok(SingleRun {
        model: ModelFile::new(features, cell, dataset.scenario_hash.clone(), Some(split_info), trained),
        training,
        train: train_eval,
        test: test_eval,
    })
}

/// A UE measurement report as seen by the serving cell: `{"serving":..,"meas":[[c,b,r],..]}`.
/// `serving` defaults to the cell of the strongest beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serving: Option<u32>,
    pub meas: Vec<Measurement>,
}

impl MeasurementReport {
    pub fn from_record(record: &FingerprintRecord) -> Self {
        MeasurementReport {
            serving: Some(record.serving_cell_id),
            meas: record.measurements.clone(),
        }
    }

    pub fn parse_line(line: &str, lineno: usize) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("report")
                .to_string();
            Error::Parse {
                line: lineno,
                field,
                message: msg,
            }
        })
    }
}

/// Single-shot position estimate for one measurement report.
pub fn infer(model: &ModelFile, report: &MeasurementReport) -> Result<[f64; 2]> {
    let mut meas = report.meas.clone();
    sort_measurements(&mut meas);
    let serving = match report.serving {
        Some(s) => s,
        None => select_serving(&meas)
            .ok_or_else(|| Error::Data("measurement report has no beams".into()))?,
    };
    if let Some(cell) = model.cell {
        if cell != serving {
            return Err(Error::Data(format!(
                "model is specific to cell {cell} but the report is served by cell {serving}"
            )));
        }
    }
    let record = FingerprintRecord {
        x: 0.0,
        y: 0.0,
        serving_cell_id: serving,
        los_to_serving: true,
        measurements: meas,
    };
    let vector = extract(&record, &model.features)
        .map_err(|reason| Error::Data(format!("cannot build features: {reason}")))?;
    model.model.predict(&vector.values)
}

/// One estimate (or error) per non-empty input line, in order.
pub fn infer_lines<R: BufRead>(model: &ModelFile, input: R) -> Vec<Result<[f64; 2]>> {
    input
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Parse {
                line: i + 1,
                field: "report".into(),
                message: e.to_string(),
            })),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(MeasurementReport::parse_line(&l, i + 1).and_then(|r| infer(model, &r))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_and_disjointness() {
        let items: Vec<u32> = (0..10).collect();
        let (tr, te) = split(&items, 0.9, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (9, 1));
        let (tr2, te2) = split(&items, 0.9, 3).unwrap();
        assert_eq!((tr.clone(), te.clone()), (tr2, te2));
        let mut all: Vec<u32> = tr.iter().chain(&te).copied().collect();
        all.sort();
        assert_eq!(all, items);
        assert!(split(&items, 0.01, 0).is_err());
        assert!(split(&items, 1.0, 0).is_err());
        assert!(split(&[1u8], 0.5, 0).is_err());
    }

    #[test]
    fn spec_toml_defaults() {
        let spec = ExperimentSpec::from_toml_str(
            r#"
            name = "t"
            topology = "cell-specific"
            cells = "largest"
            [[features]]
            serving_beams = 3
            neighbor_beams = 2
            [[models]]
            kind = "mlp"
            hidden_layer_widths = [64, 64]
            [[models]]
            kind = "tree"
            "#,
        )
        .unwrap();
        assert_eq!(spec.train_fraction, 0.9);
        assert_eq!(spec.cells, CellSelection::Named(CellSelector::Largest));
        assert!(spec.features[0].include_serving_cell_id);
        assert!(!spec.features[0].for_topology(spec.topology).include_serving_cell_id);
        spec.validate().unwrap();
        assert_eq!(spec.models[0].tag(), "mlp-64x64-tanh");
        assert_eq!(spec.models[1].tag(), "tree-d30-l2");
        let ids = ExperimentSpec::from_toml_str(
            "cells = [14, 1]\n[[features]]\nserving_beams = 3\n[[models]]\nkind = \"tree\"\n",
        )
        .unwrap();
        assert_eq!(ids.cells, CellSelection::Ids(vec![14, 1]));
        let back = ExperimentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(vec![FeatureConfig::network(3, 2)], vec![]);
        assert!(spec.validate().is_err());
        spec.models.push(ModelSpec::Tree(TreeConfig::default()));
        spec.validate().unwrap();
        spec.train_fraction = 1.0;
        assert!(spec.validate().is_err());
        spec.train_fraction = 0.9;
        spec.features[0].n_serving_beams = 5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn malformed_report_names_field() {
        match MeasurementReport::parse_line(r#"{"serving": 3}"#, 4) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "meas");
            }
            other => panic!("{other:?}"),
        }
    }
}
