//! Beam-RSRP fingerprint datasets: grid sweep, serving-cell selection, LoS filtering,
//! per-cell partitioning and the line-delimited JSON file format.
//!
//! File layout: the first line is a header object
//! `{"format":"beamprint-dataset","version":1,"scenario_hash":..,"seed":..,"records":N}`,
//! followed by one record per line:
//! `{"x":..,"y":..,"serving":..,"los":..,"meas":[[cell,beam,rsrp],..]}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::cell_link;
use crate::scenario::Scenario;

pub const DATASET_FORMAT: &str = "beamprint-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, u32, f64)", into = "(u32, u32, f64)")]
pub struct Measurement {
    pub cell_id: u32,
    pub beam_id: u32,
    pub rsrp_dbm: f64,
}

impl From<(u32, u32, f64)> for Measurement {
    fn from((cell_id, beam_id, rsrp_dbm): (u32, u32, f64)) -> Self {
        Measurement {
            cell_id,
            beam_id,
            rsrp_dbm,
        }
    }
}

impl From<Measurement> for (u32, u32, f64) {
    fn from(m: Measurement) -> Self {
        (m.cell_id, m.beam_id, m.rsrp_dbm)
    }
}

/// Strongest first; equal powers ordered by (cell id, beam id) ascending.
pub fn sort_measurements(meas: &mut [Measurement]) {
    meas.sort_by(|a, b| {
        b.rsrp_dbm
            .total_cmp(&a.rsrp_dbm)
            .then(a.cell_id.cmp(&b.cell_id))
            .then(a.beam_id.cmp(&b.beam_id))
    });
}

/// Cell owning the strongest beam, lowest cell id on ties. `None` for an empty list.
pub fn select_serving(meas: &[Measurement]) -> Option<u32> {
    meas.iter()
        .fold(None::<&Measurement>, |best, m| match best {
            None => Some(m),
            Some(b) if m.rsrp_dbm > b.rsrp_dbm
                || (m.rsrp_dbm == b.rsrp_dbm && m.cell_id < b.cell_id) =>
            {
                Some(m)
            }
            keep => keep,
        })
        .map(|m| m.cell_id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintRecord {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "serving")]
    pub serving_cell_id: u32,
    #[serde(rename = "los")]
    pub los_to_serving: bool,
    #[serde(rename = "meas")]
    pub measurements: Vec<Measurement>,
}

impl FingerprintRecord {
    /// Checks the record invariants: non-empty, sorted, serving cell on top.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let top = self.measurements.first().ok_or("empty measurement list")?;
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err("location is not finite".into());
        }
        if self.measurements.iter().any(|m| !m.rsrp_dbm.is_finite()) {
            return Err("non-finite rsrp".into());
        }
        if self
            .measurements
            .windows(2)
            .any(|w| w[0].rsrp_dbm < w[1].rsrp_dbm)
        {
            return Err("measurements not sorted by descending rsrp".into());
        }
        if top.cell_id != self.serving_cell_id {
            return Err(format!(
                "serving cell {} differs from strongest cell {}",
                self.serving_cell_id, top.cell_id
            ));
        }
        Ok(())
    }

    pub fn location(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<FingerprintRecord>,
    pub scenario_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetOptions {
    /// Shadowing seed; the scenario's `rng_seed` when absent.
    pub seed: Option<u64>,
    /// Keep only the strongest `k` beams of every cell. Full lists when absent.
    pub beams_per_cell: Option<usize>,
}

/// Sweeps every grid point with full (cell, beam) measurement lists.
pub fn build_dataset(scenario: &Scenario) -> Result<Dataset> {
    build_dataset_with(scenario, &DatasetOptions::default())
}

pub fn build_dataset_with(scenario: &Scenario, options: &DatasetOptions) -> Result<Dataset> {
    let points = scenario.grid_points();
    if points.is_empty() {
        return Err(Error::Data("scenario grid has no outdoor points".into()));
    }
    if options.beams_per_cell == Some(0) {
        return Err(Error::Config("beams_per_cell must be at least 1".into()));
    }
    let seed = options.seed.unwrap_or(scenario.config().rng_seed);
    let codebook = scenario.codebook();
    let cells = scenario.cells();
    let cell_index: HashMap<u32, usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.cell_id, i))
        .collect();

    let records = points
        .par_iter()
        .map(|gp| {
            let point = gp.as_point3();
            let mut meas = Vec::with_capacity(cells.len() * codebook.len());
            for cell in cells {
                let link = cell_link(scenario, cell, point, seed)?;
                meas.extend(codebook.beams.iter().map(|beam| Measurement {
                    cell_id: cell.cell_id,
                    beam_id: beam.beam_id,
                    rsrp_dbm: link.beam_rsrp_dbm(codebook, beam),
                }));
            }
            sort_measurements(&mut meas);
            let serving = meas[0].cell_id;
            if let Some(k) = options.beams_per_cell {
                let mut kept = vec![0usize; cells.len()];
                meas.retain(|m| {
                    let slot = &mut kept[cell_index[&m.cell_id]];
                    *slot += 1;
                    *slot <= k
                });
            }
            let serving_cell = &cells[cell_index[&serving]];
            Ok(FingerprintRecord {
                x: gp.x,
                y: gp.y,
                serving_cell_id: serving,
                los_to_serving: scenario.line_of_sight(serving_cell.position, point),
                measurements: meas,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Dataset {
        records,
        scenario_hash: scenario.hash().to_string(),
        seed,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn with_records(&self, records: Vec<FingerprintRecord>) -> Dataset {
        Dataset {
            records,
            scenario_hash: self.scenario_hash.clone(),
            seed: self.seed,
        }
    }

    /// Fraction of records with line of sight to their serving cell.
    pub fn los_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let n = self.records.iter().filter(|r| r.los_to_serving).count();
        n as f64 / self.records.len() as f64
    }

    /// Record invariants plus unique locations.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.records.len());
        for (i, r) in self.records.iter().enumerate() {
            r.validate()
                .map_err(|m| Error::Validation(format!("record {i}: {m}")))?;
            if !seen.insert((r.x.to_bits(), r.y.to_bits())) {
                return Err(Error::Validation(format!(
                    "record {i}: duplicate location ({}, {})",
                    r.x, r.y
                )));
            }
        }
        Ok(())
    }

    /// Checks that the dataset was generated from `scenario`.
    pub fn validate_against(&self, scenario: &Scenario) -> Result<()> {
        if self.scenario_hash != scenario.hash() {
            return Err(Error::Validation(format!(
                "dataset scenario hash {} does not match scenario {}",
                self.scenario_hash,
                scenario.hash()
            )));
        }
        let known: HashSet<u32> = scenario.cells().iter().map(|c| c.cell_id).collect();
        for (i, r) in self.records.iter().enumerate() {
            if let Some(m) = r.measurements.iter().find(|m| !known.contains(&m.cell_id)) {
                return Err(Error::Validation(format!(
                    "record {i} references unknown cell {}",
                    m.cell_id
                )));
            }
        }
        Ok(())
    }
}

/// Keeps records with line of sight to the serving cell, in order.
pub fn los_filter(dataset: &Dataset) -> Result<Dataset> {
    let kept: Vec<_> = dataset
        .records
        .iter()
        .filter(|r| r.los_to_serving)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::Data("no line-of-sight records to train on".into()));
    }
    Ok(dataset.with_records(kept))
}

/// Splits records by serving cell; order within each partition is preserved.
pub fn partition_by_cell(dataset: &Dataset) -> BTreeMap<u32, Dataset> {
    let mut parts: BTreeMap<u32, Vec<FingerprintRecord>> = BTreeMap::new();
    for r in &dataset.records {
        parts.entry(r.serving_cell_id).or_default().push(r.clone());
    }
    parts
        .into_iter()
        .map(|(id, recs)| (id, dataset.with_records(recs)))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    scenario_hash: String,
    seed: u64,
    records: usize,
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    let header = Header {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        scenario_hash: dataset.scenario_hash.clone(),
        seed: dataset.seed,
        records: dataset.records.len(),
    };
    let io = |e: std::io::Error| Error::io("<dataset stream>", e);
    serde_json::to_writer(&mut out, &header).map_err(|e| Error::Data(e.to_string()))?;
    out.write_all(b"\n").map_err(io)?;
    for r in &dataset.records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Data(e.to_string()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn field_of(err: &serde_json::Error, fallback: &str) -> String {
    let msg = err.to_string();
    msg.split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or(fallback)
        .to_string()
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines();
    let parse = |line: usize, field: &str, message: String| Error::Parse {
        line,
        field: field.to_string(),
        message,
    };
    let first = lines
        .next()
        .ok_or_else(|| parse(1, "header", "empty file".into()))?
        .map_err(|e| parse(1, "header", e.to_string()))?;
    let header: Header = serde_json::from_str(&first)
        .map_err(|e| parse(1, &field_of(&e, "header"), e.to_string()))?;
    if header.format != DATASET_FORMAT {
        return Err(parse(1, "format", format!("unexpected format {:?}", header.format)));
    }
    if header.version != DATASET_VERSION {
        return Err(parse(1, "version", format!("unsupported version {}", header.version)));
    }

    let mut records = Vec::with_capacity(header.records);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(|e| parse(lineno, "record", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FingerprintRecord = serde_json::from_str(&line)
            .map_err(|e| parse(lineno, &field_of(&e, "record"), e.to_string()))?;
        rec.validate()
            .map_err(|m| Error::Validation(format!("line {lineno}: {m}")))?;
        records.push(rec);
    }
    if records.len() != header.records {
        return Err(parse(
            records.len() + 2,
            "records",
            format!(
                "file truncated: header declares {} records, found {}",
                header.records,
                records.len()
            ),
        ));
    }
    let ds = Dataset {
        records,
        scenario_hash: header.scenario_hash,
        seed: header.seed,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, BufWriter::new(file))
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}

/// Loads a dataset and checks it against the scenario it claims to come from.
pub fn load_for_scenario(path: impl AsRef<Path>, scenario: &Scenario) -> Result<Dataset> {
    let ds = load(path)?;
    ds.validate_against(scenario)?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, Point3, ScenarioConfig, SectorConfig, SiteConfig};

    fn meas(cell: u32, beam: u32, rsrp: f64) -> Measurement {
        Measurement {
            cell_id: cell,
            beam_id: beam,
            rsrp_dbm: rsrp,
        }
    }

    fn small(sectors: Vec<SectorConfig>) -> Scenario {
        build_scenario(ScenarioConfig {
            area_width_m: 20.0,
            area_height_m: 10.0,
            grid_resolution_m: 2.0,
            sites: vec![SiteConfig {
                position: Point3::new(-5.0, 5.0, 10.0),
                sectors,
            }],
            buildings: vec![],
            ..ScenarioConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn single_cell_serves_everything() {
        let s = small(vec![SectorConfig {
            cell_id: Some(3),
            boresight_azimuth_deg: 0.0,
            mechanical_downtilt_deg: 5.0,
            tx_power_dbm: 30.0,
        }]);
        let ds = build_dataset(&s).unwrap();
        assert_eq!(ds.len(), s.grid_points().len());
        assert!(ds.records.iter().all(|r| r.serving_cell_id == 3));
        assert!(ds.records.iter().all(|r| r.measurements.len() == 32));
        ds.validate().unwrap();
    }

    #[test]
    fn tie_goes_to_lower_cell_id() {
        let s = build_scenario(ScenarioConfig {
            area_width_m: 20.0,
            area_height_m: 20.0,
            sites: vec![SiteConfig {
                position: Point3::new(0.0, 0.0, 10.0),
                sectors: vec![
                    SectorConfig {
                        cell_id: Some(9),
                        boresight_azimuth_deg: 90.0,
                        mechanical_downtilt_deg: 5.0,
                        tx_power_dbm: 30.0,
                    },
                    SectorConfig {
                        cell_id: Some(4),
                        boresight_azimuth_deg: -90.0,
                        mechanical_downtilt_deg: 5.0,
                        tx_power_dbm: 30.0,
                    },
                ],
            }],
            buildings: vec![],
            ..ScenarioConfig::default()
        })
        .unwrap();
        let ds = build_dataset(&s).unwrap();
        // points on the positive x axis sit exactly between the two boresights
        let on_axis: Vec<_> = ds.records.iter().filter(|r| r.y == 0.0 && r.x > 0.0).collect();
        assert!(!on_axis.is_empty());
        for r in on_axis {
            assert_eq!(r.measurements[0].rsrp_dbm, r.measurements[1].rsrp_dbm);
            assert_eq!(r.serving_cell_id, 4);
        }
    }

    #[test]
    fn select_serving_ties_and_empty() {
        assert_eq!(select_serving(&[]), None);
        let m = [meas(5, 0, -50.0), meas(2, 3, -50.0), meas(1, 0, -60.0)];
        assert_eq!(select_serving(&m), Some(2));
    }

    #[test]
    fn truncation_keeps_strongest_per_cell() {
        let s = small(crate::scenario::three_sectors(0.0));
        let full = build_dataset(&s).unwrap();
        let cut = build_dataset_with(
            &s,
            &DatasetOptions {
                beams_per_cell: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        for (f, c) in full.records.iter().zip(&cut.records) {
            assert_eq!(f.measurements.len(), 3 * 32);
            assert_eq!(c.measurements.len(), 3 * 4);
            assert_eq!(f.serving_cell_id, c.serving_cell_id);
            for cell in 1..=3u32 {
                let a: Vec<_> = f.measurements.iter().filter(|m| m.cell_id == cell).take(4).collect();
                let b: Vec<_> = c.measurements.iter().filter(|m| m.cell_id == cell).collect();
                assert_eq!(a, b);
            }
        }
    }

    fn toy() -> Dataset {
        let rec = |x: f64, serving: u32, los: bool| FingerprintRecord {
            x,
            y: 0.0,
            serving_cell_id: serving,
            los_to_serving: los,
            measurements: vec![meas(serving, 0, -40.0 - x), meas(99, 1, -70.0)],
        };
        Dataset {
            records: vec![rec(0.0, 1, true), rec(1.0, 2, false), rec(2.0, 1, true), rec(3.0, 2, true)],
            scenario_hash: "abc".into(),
            seed: 7,
        }
    }

    #[test]
    fn filter_and_partition() {
        let ds = toy();
        let los = los_filter(&ds).unwrap();
        assert_eq!(los.len(), 3);
        assert!(los.records.iter().all(|r| r.los_to_serving));
        assert_eq!(los_filter(&los).unwrap(), los);

        let mut none = ds.clone();
        none.records.iter_mut().for_each(|r| r.los_to_serving = false);
        assert!(matches!(los_filter(&none), Err(Error::Data(_))));

        let parts = partition_by_cell(&ds);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts.values().map(Dataset::len).sum::<usize>(), ds.len());
        assert_eq!(parts[&1].records[1].x, 2.0);
    }

    #[test]
    fn file_round_trip_and_errors() {
        let ds = toy();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, ds);

        let text = String::from_utf8(buf.clone()).unwrap();
        let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_dataset(cut.as_bytes()), Err(Error::Parse { .. })));
        let partial = &text[..text.len() - 10];
        assert!(matches!(read_dataset(partial.as_bytes()), Err(Error::Parse { .. })));

        let bad = text.replacen("\"serving\"", "\"srv\"", 1);
        match read_dataset(bad.as_bytes()) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "serving");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
