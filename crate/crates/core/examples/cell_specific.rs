//! One model per serving cell versus a single network-level model, compared cell by cell.

use beamprint::features::{FeatureConfig, Topology};
use beamprint::mlp::MlpConfig;
use beamprint::pipeline::{run_experiment, ExperimentSpec, ModelSpec};

fn main() -> beamprint::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let model = ModelSpec::Mlp(MlpConfig { hidden_layer_widths: vec![64, 64], rng_seed: 7, ..MlpConfig::default() });
    let base = std::env::temp_dir().join("beamprint-cell-specific");

    let mut net = ExperimentSpec::new(vec![FeatureConfig::network(3, 2)], vec![model.clone()]);
    net.split_seed = 1;
    net.output_dir = base.join("network");
    let mut cell = net.clone();
    cell.topology = Topology::CellSpecific;
    cell.output_dir = base.join("cells");

    let (net, cell) = rayon::join(|| run_experiment(&net), || run_experiment(&cell));
    let (net, cell) = (net?, cell?);
    let net_report = &net.reports[0];
    println!("{:>5} {:>6} {:>10} {:>10}", "cell", "n_test", "network_m", "cell_m");
    for r in cell.reports.iter().filter(|r| r.cell.is_some()) {
        let c = r.cell.unwrap();
        let n = net_report.test_by_cell.get(&c).map_or(f64::NAN, |s| s.mean_error_m);
        println!("{c:>5} {:>6} {n:>10.3} {:>10.3}", r.n_test, r.test.mean_error_m);
    }
    for s in &cell.manifest.skipped_cells {
        println!("skipped cell {} ({} train records)", s.cell, s.train_records);
    }
    let pooled = cell.reports.iter().find(|r| !r.pooled_cells.is_empty()).expect("pooled report");
    println!("\npooled cell-specific mean {:.3} m vs network-level {:.3} m", pooled.test.mean_error_m, net_report.test.mean_error_m);
    Ok(())
}
