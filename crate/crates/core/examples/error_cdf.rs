//! Compares two regressors on the same test split: percentiles, comparison table and CDF files.

use beamprint::dtree::TreeConfig;
use beamprint::eval::compare;
use beamprint::features::FeatureConfig;
use beamprint::fingerprint::{build_dataset_with, DatasetOptions};
use beamprint::mlp::MlpConfig;
use beamprint::pipeline::{train_single, ModelSpec, SplitInfo};
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let dataset = build_dataset_with(&scenario, &DatasetOptions { seed: None, beams_per_cell: Some(4) })?;
    let features = FeatureConfig::network(3, 2);
    let split = SplitInfo { train_fraction: 0.9, seed: 1 };
    let models = [
        ModelSpec::Tree(TreeConfig::default()),
        ModelSpec::Mlp(MlpConfig { hidden_layer_widths: vec![64], max_epochs: 60, ..MlpConfig::default() }),
    ];
    let out = std::env::temp_dir().join("beamprint-example");
    std::fs::create_dir_all(&out).map_err(|e| beamprint::Error::Io { path: out.clone(), source: e })?;

    let mut reports = Vec::new();
    for m in &models {
        let run = train_single(&dataset, &features, m, split, None)?;
        let r = run.test;
        println!("{}: p50 {:.2}  p80 {:.2}  p90 {:.2}  p95 {:.2} m", r.descriptor, r.percentile(50).unwrap(), r.percentile(80).unwrap(), r.percentile(90).unwrap(), r.percentile(95).unwrap());
        let path = out.join(format!("{}.csv", r.descriptor));
        std::fs::write(&path, r.cdf_csv()).map_err(|e| beamprint::Error::Io { path: path.clone(), source: e })?;
        println!("  cdf -> {}", path.display());
        reports.push(r);
    }
    println!("\n{}", compare(&reports)?);

    // text CDF: fraction of test points within each radius
    for radius in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let row: Vec<String> = reports
            .iter()
            .map(|r| {
                let k = r.cdf.partition_point(|(e, _)| *e <= radius);
                format!("{:>5.1}%", 100.0 * k as f64 / r.n_samples as f64)
            })
            .collect();
        println!("  <= {radius:>4} m: {}", row.join("  "));
    }
    Ok(())
}
