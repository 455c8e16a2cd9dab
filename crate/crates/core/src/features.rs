//! Feature vectors built from fingerprint records, and z-score normalisation.
//!
//! Layout of a vector with raw id encoding:
//!
//! ```text
//! [beam_1, rsrp_1, .., beam_K, rsrp_K, (serving cell id)?, cell_n1, beam_n1, rsrp_n1, ..]
//! ```
//!
//! where the K serving beams are the strongest beams of the serving cell and each
//! neighbour entry is the strongest beam of one of the N strongest other cells.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{FingerprintRecord, Measurement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    NetworkLevel,
    CellSpecific,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::NetworkLevel => "network-level",
            Topology::CellSpecific => "cell-specific",
        })
    }
}

/// Vocabulary for one-hot id encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotSpace {
    pub cell_ids: Vec<u32>,
    pub n_beams: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    #[serde(rename = "serving_beams")]
    pub n_serving_beams: usize,
    #[serde(rename = "neighbor_beams", default)]
    pub n_neighbor_beams: usize,
    #[serde(rename = "cell_id_feature", default = "yes")]
    pub include_serving_cell_id: bool,
    #[serde(default = "network_level")]
    pub topology: Topology,
    /// Replaces raw numeric ids by one-hot blocks when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_hot: Option<OneHotSpace>,
}

fn yes() -> bool {
    true
}
fn network_level() -> Topology {
    Topology::NetworkLevel
}

pub const MAX_NEIGHBOR_BEAMS: usize = 3;

impl FeatureConfig {
    pub fn network(serving: usize, neighbors: usize) -> Self {
        FeatureConfig {
            n_serving_beams: serving,
            n_neighbor_beams: neighbors,
            include_serving_cell_id: true,
            topology: Topology::NetworkLevel,
            one_hot: None,
        }
    }

    pub fn cell_specific(serving: usize, neighbors: usize) -> Self {
        FeatureConfig {
            n_serving_beams: serving,
            n_neighbor_beams: neighbors,
            include_serving_cell_id: false,
            topology: Topology::CellSpecific,
            one_hot: None,
        }
    }

    /// The same beams under another topology. Cell-specific drops the cell-id feature.
    pub fn for_topology(&self, topology: Topology) -> Self {
        let mut out = self.clone();
        out.topology = topology;
        if topology == Topology::CellSpecific {
            out.include_serving_cell_id = false;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_serving_beams < 1 {
            return Err(Error::Config("serving_beams must be at least 1".into()));
        }
        if self.n_neighbor_beams > MAX_NEIGHBOR_BEAMS {
            return Err(Error::Config(format!(
                "neighbor_beams must be in 0..={MAX_NEIGHBOR_BEAMS}"
            )));
        }
        if self.topology == Topology::CellSpecific && self.include_serving_cell_id {
            return Err(Error::Config(
                "cell-specific features cannot include the serving cell id".into(),
            ));
        }
        if let Some(space) = &self.one_hot {
            if space.cell_ids.is_empty() || space.n_beams == 0 {
                return Err(Error::Config("one-hot space must be non-empty".into()));
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        let (cell_w, beam_w) = match &self.one_hot {
            None => (1, 1),
            Some(s) => (s.cell_ids.len(), s.n_beams as usize),
        };
        self.n_serving_beams * (beam_w + 1)
            + usize::from(self.include_serving_cell_id) * cell_w
            + self.n_neighbor_beams * (cell_w + beam_w + 1)
    }

    /// Short tag such as `s3n2+id`.
    pub fn descriptor(&self) -> String {
        format!(
            "s{}n{}{}{}",
            self.n_serving_beams,
            self.n_neighbor_beams,
            if self.include_serving_cell_id { "+id" } else { "" },
            if self.one_hot.is_some() { "+onehot" } else { "" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// True (x, y) in meters; zero when unknown (inference input).
    pub label: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    InsufficientServingBeams,
    InsufficientNeighborCells,
    UnknownId,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub insufficient_serving_beams: usize,
    pub insufficient_neighbor_cells: usize,
    pub unknown_id: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.insufficient_serving_beams + self.insufficient_neighbor_cells + self.unknown_id
    }

    fn count(&mut self, reason: SkipReason) {
        match reason {
            SkipReason::InsufficientServingBeams => self.insufficient_serving_beams += 1,
            SkipReason::InsufficientNeighborCells => self.insufficient_neighbor_cells += 1,
            SkipReason::UnknownId => self.unknown_id += 1,
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::InsufficientServingBeams => "not enough serving-cell beams",
            SkipReason::InsufficientNeighborCells => "not enough neighbour cells",
            SkipReason::UnknownId => "id outside the one-hot vocabulary",
        })
    }
}

fn push_cell(out: &mut Vec<f64>, space: Option<&OneHotSpace>, cell_id: u32) -> bool {
    match space {
        None => {
            out.push(f64::from(cell_id));
            true
        }
        Some(s) => match s.cell_ids.iter().position(|&c| c == cell_id) {
            Some(i) => {
                out.extend((0..s.cell_ids.len()).map(|k| if k == i { 1.0 } else { 0.0 }));
                true
            }
            None => false,
        },
    }
}

fn push_beam(out: &mut Vec<f64>, space: Option<&OneHotSpace>, beam_id: u32) -> bool {
    match space {
        None => {
            out.push(f64::from(beam_id));
            true
        }
        Some(s) if beam_id < s.n_beams => {
            out.extend((0..s.n_beams).map(|k| if k == beam_id { 1.0 } else { 0.0 }));
            true
        }
        Some(_) => false,
    }
}

/// Builds the feature vector of one record. Measurements are assumed strongest-first.
pub fn extract(
    record: &FingerprintRecord,
    config: &FeatureConfig,
) -> std::result::Result<FeatureVector, SkipReason> {
    let serving = record.serving_cell_id;
    let serving_beams: Vec<&Measurement> = record
        .measurements
        .iter()
        .filter(|m| m.cell_id == serving)
        .take(config.n_serving_beams)
        .collect();
    if serving_beams.len() < config.n_serving_beams {
        return Err(SkipReason::InsufficientServingBeams);
    }
    let mut neighbors: Vec<&Measurement> = Vec::with_capacity(config.n_neighbor_beams);
    for m in &record.measurements {
        if neighbors.len() == config.n_neighbor_beams {
            break;
        }
        if m.cell_id != serving && neighbors.iter().all(|n| n.cell_id != m.cell_id) {
            neighbors.push(m);
        }
    }
    if neighbors.len() < config.n_neighbor_beams {
        return Err(SkipReason::InsufficientNeighborCells);
    }

    let space = config.one_hot.as_ref();
    let mut values = Vec::with_capacity(config.width());
    let mut ok = true;
    for m in &serving_beams {
        ok &= push_beam(&mut values, space, m.beam_id);
        values.push(m.rsrp_dbm);
    }
    if config.include_serving_cell_id {
        ok &= push_cell(&mut values, space, serving);
    }
    for m in &neighbors {
        ok &= push_cell(&mut values, space, m.cell_id);
        ok &= push_beam(&mut values, space, m.beam_id);
        values.push(m.rsrp_dbm);
    }
    if !ok {
        return Err(SkipReason::UnknownId);
    }
    debug_assert_eq!(values.len(), config.width());
    Ok(FeatureVector {
        values,
        label: record.location(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub vectors: Vec<FeatureVector>,
    /// Index into the input records of every kept vector.
    pub kept: Vec<usize>,
    pub skipped: SkipCounts,
}

pub fn extract_all(records: &[FingerprintRecord], config: &FeatureConfig) -> Extraction {
    let mut out = Extraction::default();
    for (i, r) in records.iter().enumerate() {
        match extract(r, config) {
            Ok(v) => {
                out.vectors.push(v);
                out.kept.push(i);
            }
            Err(reason) => out.skipped.count(reason),
        }
    }
    out
}

/// Per-column mean and population standard deviation of features and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub label_mean: [f64; 2],
    pub label_std: [f64; 2],
    pub n_fitted: usize,
}

fn mean_std(column: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = column.clone().sum::<f64>() / n as f64;
    let var = column.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    // constant columns would otherwise blow up on rounding noise
    if !(std > 1e-12 * mean.abs().max(1.0)) {
        (mean, 1.0)
    } else {
        (mean, std)
    }
}

pub fn fit_normalizer(train: &[FeatureVector]) -> Result<NormalizationStats> {
    let first = train
        .first()
        .ok_or_else(|| Error::Data("cannot fit normalizer on an empty training set".into()))?;
    let width = first.values.len();
    if let Some(bad) = train.iter().find(|v| v.values.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: bad.values.len(),
        });
    }
    let n = train.len();
    let (feature_mean, feature_std) = (0..width)
        .map(|j| mean_std(train.iter().map(move |v| v.values[j]), n))
        .unzip();
    let (lx, sx) = mean_std(train.iter().map(|v| v.label[0]), n);
    let (ly, sy) = mean_std(train.iter().map(|v| v.label[1]), n);
    Ok(NormalizationStats {
        feature_mean,
        feature_std,
        label_mean: [lx, ly],
        label_std: [sx, sy],
        n_fitted: n,
    })
}

impl NormalizationStats {
    pub fn width(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut out = values.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, values: &mut [f64]) -> Result<()> {
        if values.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: values.len(),
            });
        }
        for ((v, m), s) in values.iter_mut().zip(&self.feature_mean).zip(&self.feature_std) {
            *v = (*v - m) / s;
        }
        Ok(())
    }

    pub fn normalize_label(&self, label: [f64; 2]) -> [f64; 2] {
        [
            (label[0] - self.label_mean[0]) / self.label_std[0],
            (label[1] - self.label_mean[1]) / self.label_std[1],
        ]
    }

    pub fn invert_label(&self, z: [f64; 2]) -> [f64; 2] {
        [
            z[0] * self.label_std[0] + self.label_mean[0],
            z[1] * self.label_std[1] + self.label_mean[1],
        ]
    }
}
