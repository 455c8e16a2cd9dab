//! Trains a cell-specific two-layer MLP on the largest serving cell and prints the loss
//! curve and accuracy.
//!
//! `cargo run --release --example train_mlp -- [width]`

use beamprint::features::FeatureConfig;
use beamprint::fingerprint::{build_dataset_with, los_filter, partition_by_cell, DatasetOptions};
use beamprint::mlp::MlpConfig;
use beamprint::pipeline::{train_single, ModelSpec, SplitInfo};
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let width: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(64);
    let scenario = build_scenario(ScenarioConfig::default())?;
    let dataset = build_dataset_with(&scenario, &DatasetOptions { seed: None, beams_per_cell: Some(4) })?;
    let parts = partition_by_cell(&los_filter(&dataset)?);
    let (cell, part) = parts.iter().max_by_key(|(c, p)| (p.len(), std::cmp::Reverse(**c))).expect("cells");
    println!("largest cell {cell}: {} LoS records", part.len());

    let model = ModelSpec::Mlp(MlpConfig {
        hidden_layer_widths: vec![width, width],
        rng_seed: 7,
        ..MlpConfig::default()
    });
    let split = SplitInfo { train_fraction: 0.9, seed: 1 };
    let run = train_single(&dataset, &FeatureConfig::network(3, 2), &model, split, Some(*cell))?;

    let t = run.training.as_ref().expect("mlp reports training");
    println!("{} epochs (early stop: {}), final loss {:.5}", t.epochs_run, t.stopped_early, t.final_loss);
    for (epoch, loss) in t.loss_history.iter().enumerate().filter(|(e, _)| e % 25 == 0) {
        let bar = "#".repeat(((loss.max(1e-4).log10() + 4.0) * 12.0) as usize);
        println!("  epoch {:>3}  {loss:.5}  {bar}", epoch + 1);
    }
    println!("train mean error {:.3} m", run.train.mean_error_m);
    println!("test  mean error {:.3} m (std {:.3}, p90 {:.3})", run.test.mean_error_m, run.test.std_error_m, run.test.percentile(90).unwrap());
    Ok(())
}
