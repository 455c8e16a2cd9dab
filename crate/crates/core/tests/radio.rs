//! RSRP model against an independent implementation: explicit rotation matrices, unit
//! vectors and the textbook link budget.

use beamprint::fingerprint::{select_serving, sort_measurements, Measurement};
use beamprint::radio::{rsrp_dbm, sector_direction};
use beamprint::scenario::{build_scenario, Cell, Point3, Scenario, ScenarioConfig, SectorConfig, SiteConfig};
use proptest::prelude::*;

const C: f64 = 299_792_458.0;

fn scenario_with(azimuth: f64, tilt: f64, site: Point3) -> Scenario {
    build_scenario(ScenarioConfig {
        area_width_m: 400.0,
        area_height_m: 400.0,
        sites: vec![SiteConfig {
            position: site,
            sectors: vec![SectorConfig {
                cell_id: Some(1),
                boresight_azimuth_deg: azimuth,
                mechanical_downtilt_deg: tilt,
                tx_power_dbm: 30.0,
            }],
        }],
        buildings: vec![],
        ..ScenarioConfig::default()
    })
    .unwrap()
}

/// Sector-frame (azimuth, elevation) via the cell's orthonormal basis.
fn oracle_angles(cell: &Cell, p: Point3) -> (f64, f64, f64) {
    let (phi, t) = (cell.boresight_azimuth_deg.to_radians(), cell.mechanical_downtilt_deg.to_radians());
    let forward = [t.cos() * phi.cos(), t.cos() * phi.sin(), -t.sin()];
    let left = [-phi.sin(), phi.cos(), 0.0];
    let up = [t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos()];
    let d = [p.x - cell.position.x, p.y - cell.position.y, p.z - cell.position.z];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let r = dot(d, d).sqrt();
    let (f, l, u) = (dot(d, forward), dot(d, left), dot(d, up));
    (l.atan2(f).to_degrees(), (u / r).asin().to_degrees(), r)
}

fn oracle_rsrp(scenario: &Scenario, beam_id: u32, p: Point3) -> f64 {
    let cell = &scenario.cells()[0];
    let cb = &scenario.config().codebook;
    let ant = &scenario.config().antenna;
    let (az, el, r) = oracle_angles(cell, p);
    let lambda = C / scenario.config().carrier_freq_hz;
    let fspl = 20.0 * (4.0 * std::f64::consts::PI * r / lambda).log10();
    let element = ant.max_gain_dbi
        - (12.0 * (az / ant.azimuth_3db_beamwidth_deg).powi(2)
            + 12.0 * (el / ant.elevation_3db_beamwidth_deg).powi(2))
        .min(ant.front_to_back_db);
    let col = beam_id % cb.n_azimuth;
    let row = beam_id / cb.n_azimuth;
    let steer_az = -cb.azimuth_span_deg / 2.0 + cb.azimuth_span_deg * (f64::from(col) + 0.5) / f64::from(cb.n_azimuth);
    let steer_el = cb.elevation_top_deg
        + (cb.elevation_bottom_deg - cb.elevation_top_deg) * f64::from(row) / f64::from(cb.n_elevation - 1);
    let mut daz = az - steer_az;
    while daz >= 180.0 {
        daz -= 360.0;
    }
    while daz < -180.0 {
        daz += 360.0;
    }
    let steer = (12.0 * (daz / cb.beamwidth_az_deg).powi(2) + 12.0 * ((el - steer_el) / cb.beamwidth_el_deg).powi(2))
        .min(cb.sidelobe_floor_db);
    cell.tx_power_dbm - fspl + element + cb.array_gain_db - steer
}

prop_compose! {
    fn geometry()(
        azimuth in 0.0..360.0f64,
        tilt in 0.0..15.0f64,
        site in (0.0..400.0f64, 0.0..400.0f64, 5.0..40.0f64),
        ue in (0.0..400.0f64, 0.0..400.0f64, 0.5..3.0f64),
        beam in 0u32..32,
    ) -> (f64, f64, Point3, Point3, u32) {
        (azimuth, tilt, Point3::new(site.0, site.1, site.2), Point3::new(ue.0, ue.1, ue.2), beam)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rsrp_matches_independent_link_budget((azimuth, tilt, site, ue, beam) in geometry()) {
        let s = scenario_with(azimuth, tilt, site);
        let cell = &s.cells()[0];
        let got = rsrp_dbm(&s, cell, &s.codebook().beams[beam as usize], ue).unwrap();
        let want = oracle_rsrp(&s, beam, ue);
        prop_assert!((got - want).abs() <= 1e-9, "got {} want {}", got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn strongest_beam_is_nearest_steering_direction(
        azimuth in 0.0..360.0f64,
        tilt in 0.0..10.0f64,
        off_az in -56.0..56.0f64,
        off_el in -20.0..0.0f64,
        range in 20.0..300.0f64,
    ) {
        let site = Point3::new(200.0, 200.0, 10.0);
        let s = scenario_with(azimuth, tilt, site);
        let cell = &s.cells()[0];
        // a point at the requested sector-frame direction
        let (phi, t) = (azimuth.to_radians(), tilt.to_radians());
        let (a, e) = (off_az.to_radians(), off_el.to_radians());
        let local = [range * e.cos() * a.cos(), range * e.cos() * a.sin(), range * e.sin()];
        let x1 = local[0] * t.cos() + local[2] * t.sin();
        let z = -local[0] * t.sin() + local[2] * t.cos();
        let p = Point3::new(
            site.x + x1 * phi.cos() - local[1] * phi.sin(),
            site.y + x1 * phi.sin() + local[1] * phi.cos(),
            site.z + z,
        );
        let d = sector_direction(cell, p);
        prop_assert!((d.azimuth_deg - off_az).abs() < 1e-9 && (d.elevation_deg - off_el).abs() < 1e-9);

        let book = s.codebook();
        let best = book
            .beams
            .iter()
            .max_by(|x, y| rsrp_dbm(&s, cell, x, p).unwrap().total_cmp(&rsrp_dbm(&s, cell, y, p).unwrap()))
            .unwrap();
        let az_gap = |b: &beamprint::radio::Beam| (b.steer_azimuth_deg - off_az).abs();
        let el_gap = |b: &beamprint::radio::Beam| (b.steer_elevation_deg - off_el).abs();
        let min_az = book.beams.iter().map(az_gap).fold(f64::INFINITY, f64::min);
        let min_el = book.beams.iter().map(el_gap).fold(f64::INFINITY, f64::min);
        prop_assert!(az_gap(best) <= min_az + 1e-9);
        prop_assert!(el_gap(best) <= min_el + 1e-9);
    }

    #[test]
    fn rsrp_falls_along_a_ray(azimuth in 0.0..360.0f64, dir in (-1.0..1.0f64, -1.0..1.0f64), beam in 0usize..32) {
        prop_assume!(dir.0.hypot(dir.1) > 0.1);
        let site = Point3::new(200.0, 200.0, 10.0);
        let s = scenario_with(azimuth, 5.0, site);
        let cell = &s.cells()[0];
        let b = &s.codebook().beams[beam];
        let at = |k: f64| Point3::new(site.x + k * dir.0, site.y + k * dir.1, site.z - k * 0.05);
        let mut last = f64::INFINITY;
        for k in [5.0, 10.0, 20.0, 40.0, 80.0, 150.0] {
            let r = rsrp_dbm(&s, cell, b, at(k)).unwrap();
            prop_assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn serving_choice_ignores_a_common_offset(
        raw in prop::collection::vec((1u32..6, 0u32..32, -120.0..-40.0f64), 1..30),
        offset in -30.0..30.0f64,
    ) {
        let mut a: Vec<Measurement> = raw.iter().map(|&(c, b, r)| Measurement { cell_id: c, beam_id: b, rsrp_dbm: r }).collect();
        let mut b: Vec<Measurement> = a.iter().map(|m| Measurement { rsrp_dbm: m.rsrp_dbm + offset, ..*m }).collect();
        sort_measurements(&mut a);
        sort_measurements(&mut b);
        prop_assert_eq!(select_serving(&a), select_serving(&b));
        let ids = |v: &[Measurement]| v.iter().map(|m| (m.cell_id, m.beam_id)).collect::<Vec<_>>();
        prop_assert_eq!(ids(&a), ids(&b));
    }
}

#[test]
fn boresight_link_budget_at_100_m() {
    let site = Point3::new(0.0, 200.0, 10.0);
    let s = scenario_with(0.0, 0.0, site);
    let cell = &s.cells()[0];
    let p = Point3::new(100.0, 200.0, 10.0);
    let best = s
        .codebook()
        .beams
        .iter()
        .map(|b| rsrp_dbm(&s, cell, b, p).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    // 30 dBm - 101.39 dB + 8 dBi + 24.08 dB, less the half-spacing steering offset
    let fspl = 20.0 * (4.0 * std::f64::consts::PI * 100.0 * 28e9 / C).log10();
    assert!((fspl - 101.39).abs() < 0.01);
    let offset_loss = 12.0 * (3.75f64 / 7.0).powi(2);
    assert!((best - (30.0 - fspl + 8.0 + 10.0 * 256f64.log10() - offset_loss)).abs() < 1e-9);
}
