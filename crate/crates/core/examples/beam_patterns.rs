//! Element pattern, synthesized beam gains and the resulting RSRP for one location.

use beamprint::radio::{beam_gain_db, element_gain_db, path_loss_db, rsrp_dbm, sector_direction};
use beamprint::scenario::{build_scenario, Point3, ScenarioConfig};

fn main() -> beamprint::Result<()> {
    let scenario = build_scenario(ScenarioConfig::default())?;
    let book = scenario.codebook();

    println!("element pattern (horizontal cut)");
    for az in [0.0, 15.0, 32.5, 60.0, 90.0, 180.0] {
        println!("  {az:>6.1} deg  {:>7.2} dBi", element_gain_db(&book.element, az, 0.0));
    }

    println!("\n{} beams; gain of a few beams vs azimuth at 0 deg elevation", book.len());
    let picks = [0usize, 7, 8, 15];
    print!("  az   ");
    for &b in &picks {
        print!("  beam{:<3}", book.beams[b].beam_id);
    }
    println!();
    for az in (-60..=60).step_by(10) {
        print!("  {az:>4} ");
        for &b in &picks {
            print!("  {:>7.2}", beam_gain_db(book, &book.beams[b], f64::from(az), 0.0));
        }
        println!();
    }

    println!("\nfree-space path loss at 28 GHz");
    for d in [10.0, 50.0, 100.0, 300.0] {
        println!("  {d:>5} m  {:.2} dB", path_loss_db(scenario.config().carrier_freq_hz, d)?);
    }

    let cell = &scenario.cells()[0];
    let ue = Point3::new(60.0, 40.0, scenario.config().ue_height_m);
    let dir = sector_direction(cell, ue);
    println!(
        "\ncell {} -> UE ({}, {}): az {:.1} deg, el {:.1} deg, {:.1} m",
        cell.cell_id, ue.x, ue.y, dir.azimuth_deg, dir.elevation_deg, dir.distance_m
    );
    let mut rsrp: Vec<(u32, f64)> = book
        .beams
        .iter()
        .map(|b| Ok((b.beam_id, rsrp_dbm(&scenario, cell, b, ue)?)))
        .collect::<beamprint::Result<_>>()?;
    rsrp.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (beam, r) in rsrp.iter().take(5) {
        println!("  beam {beam:>2}: {r:.2} dBm");
    }
    Ok(())
}
