//! Builds the default scenario and draws a coarse line-of-sight map for one cell.
//!
//! `cargo run --release --example scenario_los -- [cell_id]`

use beamprint::scenario::{build_scenario, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let cell_id: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let cfg = scenario.config();

    println!("scenario {}", &scenario.hash()[..16]);
    println!(
        "{} cells on {} sites, {} buildings, area {} x {} m",
        scenario.cells().len(),
        cfg.sites.len(),
        scenario.buildings().len(),
        cfg.area_width_m,
        cfg.area_height_m
    );
    let (nx, ny) = scenario.lattice_dims();
    let points = scenario.grid_points();
    println!("lattice {nx} x {ny}, {} outdoor points", points.len());

    let cell = scenario
        .cell(cell_id)
        .ok_or_else(|| beamprint::Error::Config(format!("no cell {cell_id}")))?;
    println!(
        "\ncell {cell_id} at ({}, {}) boresight {} deg: '#' building, '+' LoS, '.' blocked",
        cell.position.x, cell.position.y, cell.boresight_azimuth_deg
    );
    let step = 6.0;
    let mut y = cfg.area_height_m;
    while y >= 0.0 {
        let mut row = String::new();
        let mut x = 0.0;
        while x <= cfg.area_width_m {
            let c = if scenario.buildings().iter().any(|b| b.contains_xy(x, y)) {
                '#'
            } else if scenario.line_of_sight(cell.position, [x, y, cfg.ue_height_m].into()) {
                '+'
            } else {
                '.'
            };
            row.push(c);
            x += step / 2.0;
        }
        println!("{row}");
        y -= step;
    }
    Ok(())
}
