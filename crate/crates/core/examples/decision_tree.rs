//! Network-level regression tree: fit, inspect the structure, evaluate.

use beamprint::dtree::{self, TreeConfig};
use beamprint::eval::{euclidean_errors, summarize};
use beamprint::features::{extract_all, FeatureConfig};
use beamprint::fingerprint::{build_dataset_with, los_filter, DatasetOptions};
use beamprint::pipeline::split;
use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let dataset = build_dataset_with(&scenario, &DatasetOptions { seed: None, beams_per_cell: Some(4) })?;
    let (train, test) = split(&los_filter(&dataset)?.records, 0.9, 1)?;
    let features = FeatureConfig::network(3, 2);
    let train = extract_all(&train, &features).vectors;
    let test = extract_all(&test, &features).vectors;

    for leaf in [1, 2, 5, 20] {
        let cfg = TreeConfig { min_samples_leaf: leaf, ..TreeConfig::default() };
        let started = std::time::Instant::now();
        let tree = dtree::fit(&train, &cfg)?;
        let fit_s = started.elapsed().as_secs_f64();
        let pred = tree.predict_batch(&test)?;
        let labels: Vec<[f64; 2]> = test.iter().map(|v| v.label).collect();
        let report = summarize(&euclidean_errors(&pred, &labels)?)?;
        println!(
            "{:<14} depth {:>2}, {:>5} leaves, fit {fit_s:.2} s: test mean {:.3} m, p90 {:.3} m",
            cfg.descriptor(),
            tree.depth(),
            tree.leaf_count(),
            report.mean_error_m,
            report.percentile(90).unwrap()
        );
    }
    Ok(())
}
