//! Trains a model, saves it, and answers JSON-lines measurement reports with position
//! estimates, the way the `infer` subcommand does.

use std::io::Cursor;

use beamprint::dtree::TreeConfig;
use beamprint::features::FeatureConfig;
use beamprint::fingerprint::{build_dataset_with, DatasetOptions};
use beamprint::pipeline::{infer_lines, split_records, train_single, MeasurementReport, ModelFile, ModelSpec, SplitInfo};
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let dataset = build_dataset_with(&scenario, &DatasetOptions { seed: None, beams_per_cell: Some(4) })?;
    let split = SplitInfo { train_fraction: 0.9, seed: 1 };
    let run = train_single(&dataset, &FeatureConfig::network(3, 2), &ModelSpec::Tree(TreeConfig::default()), split, None)?;

    let path = std::env::temp_dir().join("beamprint-tree.json");
    run.model.save(&path)?;
    let model = ModelFile::load(&path)?;
    println!("model saved to {}", path.display());

    // measurement reports from held-out locations, without their coordinates
    let (_, test) = split_records(&dataset, split, None)?;
    let mut input = String::new();
    for r in test.iter().take(5) {
        input.push_str(&serde_json::to_string(&MeasurementReport::from_record(r)).unwrap());
        input.push('\n');
    }
    input.push_str("{\"meas\": [[1, 3, -70.0]]}\n");

    for (i, result) in infer_lines(&model, Cursor::new(input)).into_iter().enumerate() {
        match (result, test.get(i)) {
            (Ok([x, y]), Some(truth)) if i < 5 => println!(
                "report {i}: estimate ({x:.1}, {y:.1}), truth ({}, {}), error {:.2} m",
                truth.x,
                truth.y,
                (x - truth.x).hypot(y - truth.y)
            ),
            (Ok([x, y]), _) => println!("report {i}: estimate ({x:.1}, {y:.1})"),
            (Err(e), _) => println!("report {i}: {e}"),
        }
    }
    Ok(())
}
