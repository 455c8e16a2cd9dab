use beamprint::scenario::{
    build_scenario, segment_hits_box, BuildingFootprint, Point3, ScenarioConfig, SiteConfig,
};
use proptest::prelude::*;

fn config(width: f64, height: f64, res: f64, buildings: Vec<BuildingFootprint>) -> ScenarioConfig {
    ScenarioConfig {
        area_width_m: width,
        area_height_m: height,
        grid_resolution_m: res,
        sites: vec![SiteConfig {
            position: Point3::new(0.0, 0.0, 10.0),
            sectors: beamprint::scenario::three_sectors(0.0),
        }],
        buildings,
        ..ScenarioConfig::default()
    }
}

prop_compose! {
    // every box starts at x >= 1 so it never covers the site at the origin
    fn building()(x in 1.0..80.0f64, y in 0.0..80.0f64, w in 0.5..20.0f64, d in 0.5..20.0f64, h in 1.0..30.0f64)
        -> BuildingFootprint {
        BuildingFootprint { min_x: x, max_x: x + w, min_y: y, max_y: y + d, height_m: h }
    }
}

prop_compose! {
    fn point()(x in -10.0..110.0f64, y in -10.0..110.0f64, z in 0.0..35.0f64) -> Point3 {
        Point3::new(x, y, z)
    }
}

fn sampled_hit(a: Point3, b: Point3, bld: &BuildingFootprint, margin: f64, n: usize) -> bool {
    (0..=n).any(|k| {
        let t = k as f64 / n as f64;
        let p = [a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)];
        p[0] >= bld.min_x - margin
            && p[0] <= bld.max_x + margin
            && p[1] >= bld.min_y - margin
            && p[1] <= bld.max_y + margin
            && p[2] >= -margin
            && p[2] <= bld.height_m + margin
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn los_is_symmetric(blds in prop::collection::vec(building(), 0..6), a in point(), b in point()) {
        let s = build_scenario(config(100.0, 100.0, 1.0, blds)).unwrap();
        prop_assert_eq!(s.line_of_sight(a, b), s.line_of_sight(b, a));
    }

    #[test]
    fn adding_a_building_never_creates_los(
        blds in prop::collection::vec(building(), 0..5),
        extra in building(),
        a in point(),
        b in point(),
    ) {
        let fewer = build_scenario(config(100.0, 100.0, 1.0, blds.clone())).unwrap();
        let mut more_blds = blds;
        more_blds.push(extra);
        let more = build_scenario(config(100.0, 100.0, 1.0, more_blds)).unwrap();
        if more.line_of_sight(a, b) {
            prop_assert!(fewer.line_of_sight(a, b));
        }
    }

    #[test]
    fn slab_test_agrees_with_dense_sampling(bld in building(), a in point(), b in point()) {
        let n = 4000;
        let len = a.distance(&b);
        let hit = segment_hits_box(a, b, &bld);
        // a sample inside the box proves contact; contact implies a sample within len/n of it
        if sampled_hit(a, b, &bld, 0.0, n) {
            prop_assert!(hit);
        }
        if hit {
            prop_assert!(sampled_hit(a, b, &bld, len / n as f64 + 1e-9, n));
        }
    }

    #[test]
    fn grid_matches_brute_force(
        w in 5.0..60.0f64,
        h in 5.0..60.0f64,
        res in prop::sample::select(vec![0.5, 1.0, 2.0, 2.5]),
        blds in prop::collection::vec(building(), 0..4),
    ) {
        let s = build_scenario(config(w, h, res, blds.clone())).unwrap();
        let mut expected = Vec::new();
        let mut j = 0;
        while j as f64 * res <= h + 1e-9 {
            let mut i = 0;
            while i as f64 * res <= w + 1e-9 {
                let (x, y) = (i as f64 * res, j as f64 * res);
                if !blds.iter().any(|b| x >= b.min_x && x <= b.max_x && y >= b.min_y && y <= b.max_y) {
                    expected.push((x, y));
                }
                i += 1;
            }
            j += 1;
        }
        let got: Vec<(f64, f64)> = s.grid_points().iter().map(|p| (p.x, p.y)).collect();
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn grazing_a_roof_edge_blocks() {
    let bld = BuildingFootprint { min_x: 10.0, max_x: 20.0, min_y: -5.0, max_y: 5.0, height_m: 10.0 };
    // passes exactly over the roof at height 10
    assert!(segment_hits_box(Point3::new(0.0, 0.0, 10.0), Point3::new(30.0, 0.0, 10.0), &bld));
    assert!(!segment_hits_box(Point3::new(0.0, 0.0, 10.001), Point3::new(30.0, 0.0, 10.001), &bld));
    // touches only the corner edge x=10, y=5
    assert!(segment_hits_box(Point3::new(0.0, 15.0, 1.0), Point3::new(20.0, -5.0, 1.0), &bld));
}

#[test]
fn default_scenario_shape() {
    let s = build_scenario(ScenarioConfig::default()).unwrap();
    assert_eq!(s.cells().len(), 24);
    let ids: std::collections::BTreeSet<u32> = s.cells().iter().map(|c| c.cell_id).collect();
    assert_eq!(ids, (1..=24).collect());
    assert_eq!(s.codebook().len(), 32);
    let cfg = s.config();
    assert!(cfg.area_width_m >= 150.0 && cfg.area_height_m >= 250.0);
}
