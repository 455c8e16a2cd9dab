//! Feature layouts for several configurations, skip accounting and z-score normalisation.

use beamprint::features::{extract, extract_all, fit_normalizer, FeatureConfig};
use beamprint::fingerprint::{build_dataset_with, los_filter, DatasetOptions};
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let dataset = build_dataset_with(
        &scenario,
        &DatasetOptions {
            seed: None,
            beams_per_cell: Some(4),
        },
    )?;
    let los = los_filter(&dataset)?;
    let record = &los.records[1234];
    println!("record at ({}, {}) served by cell {}", record.x, record.y, record.serving_cell_id);

    let configs = [
        FeatureConfig::network(3, 0),
        FeatureConfig::network(3, 2),
        FeatureConfig::network(3, 3),
        FeatureConfig::cell_specific(3, 2),
    ];
    for cfg in &configs {
        match extract(record, cfg) {
            Ok(v) => {
                let vals: Vec<String> = v.values.iter().map(|x| format!("{x:.1}")).collect();
                println!("  {:<10} width {:>2}: [{}]", cfg.descriptor(), cfg.width(), vals.join(", "));
            }
            Err(reason) => println!("  {:<10} skipped: {reason}", cfg.descriptor()),
        }
    }

    let cfg = FeatureConfig::network(3, 3);
    let ex = extract_all(&los.records, &cfg);
    println!(
        "\n{}: {} vectors, skipped {} ({} lacking neighbour cells)",
        cfg.descriptor(),
        ex.vectors.len(),
        ex.skipped.total(),
        ex.skipped.insufficient_neighbor_cells
    );

    let stats = fit_normalizer(&ex.vectors)?;
    println!("feature means: {:?}", stats.feature_mean.iter().map(|m| (m * 10.0).round() / 10.0).collect::<Vec<_>>());
    println!("label mean ({:.1}, {:.1}), std ({:.1}, {:.1})", stats.label_mean[0], stats.label_mean[1], stats.label_std[0], stats.label_std[1]);
    let z = stats.apply(&ex.vectors[0].values)?;
    println!("first vector normalised: {:?}", z.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
    Ok(())
}
