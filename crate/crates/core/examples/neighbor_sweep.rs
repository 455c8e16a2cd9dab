//! Network-level sweep over the number of neighbour cells in the feature vector, written as
//! a full experiment (reports, CDFs, models, manifest).
//!
//! `cargo run --release --example neighbor_sweep -- [spec.toml]` (defaults to a built-in spec)

use beamprint::features::FeatureConfig;
use beamprint::mlp::MlpConfig;
use beamprint::pipeline::{run_experiment, ExperimentSpec, ModelSpec};

fn main() -> beamprint::Result<()> {
    env_logger::init();
    let spec = match std::env::args().nth(1) {
        Some(path) => ExperimentSpec::load(path)?,
        None => {
            let mut spec = ExperimentSpec::new(
                (0..=3).map(|n| FeatureConfig::network(3, n)).collect(),
                vec![ModelSpec::Mlp(MlpConfig { hidden_layer_widths: vec![128], rng_seed: 7, ..MlpConfig::default() })],
            );
            spec.name = "neighbor-sweep".into();
            spec.split_seed = 1;
            spec.output_dir = std::env::temp_dir().join("beamprint-neighbor-sweep");
            spec
        }
    };
    let outcome = run_experiment(&spec)?;
    println!("{:<28} {:>6} {:>8} {:>8} {:>7}", "run", "n", "mean_m", "p90_m", "epochs");
    for r in &outcome.reports {
        println!(
            "{:<28} {:>6} {:>8.3} {:>8.3} {:>7}",
            r.id,
            r.n_test,
            r.test.mean_error_m,
            r.test.percentile(90).unwrap(),
            r.training.as_ref().map_or("-".to_string(), |t| t.epochs_run.to_string())
        );
    }
    println!("manifest: {}", spec.output_dir.join("manifest.json").display());
    Ok(())
}
