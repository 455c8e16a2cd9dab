//! Samples the default scenario into a fingerprint dataset, inspects it and round-trips it
//! through the JSON-lines file format.

use beamprint::fingerprint::{self, build_dataset_with, los_filter, partition_by_cell, DatasetOptions};
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let started = std::time::Instant::now();
    let dataset = build_dataset_with(
        &scenario,
        &DatasetOptions {
            seed: None,
            beams_per_cell: Some(4),
        },
    )?;
    println!(
        "{} records in {:.1} s, LoS-to-serving fraction {:.3}",
        dataset.len(),
        started.elapsed().as_secs_f64(),
        dataset.los_fraction()
    );

    let r = &dataset.records[dataset.len() / 2];
    println!("\nrecord at ({}, {}), serving {} (LoS {})", r.x, r.y, r.serving_cell_id, r.los_to_serving);
    for m in r.measurements.iter().take(6) {
        println!("  cell {:>2} beam {:>2}  {:.2} dBm", m.cell_id, m.beam_id, m.rsrp_dbm);
    }

    let los = los_filter(&dataset)?;
    println!("\nLoS records per serving cell");
    for (cell, part) in partition_by_cell(&los) {
        println!("  cell {cell:>2}: {}", part.len());
    }

    let dir = std::env::temp_dir().join("beamprint-example");
    std::fs::create_dir_all(&dir).map_err(|e| beamprint::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("dataset.jsonl");
    fingerprint::save(&dataset, &path)?;
    let back = fingerprint::load_for_scenario(&path, &scenario)?;
    assert_eq!(back, dataset);
    println!("\nsaved and reloaded {}", path.display());
    Ok(())
}
