//! Synthetic urban world: sites, sectors, building blocks and the UE sampling grid.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::radio::{AntennaElementParams, BeamCodebook, CodebookConfig};

/// A point in the scenario frame, meters. `z` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorConfig {
    /// Assigned automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_id: Option<u32>,
    pub boresight_azimuth_deg: f64,
    #[serde(default = "default_downtilt")]
    pub mechanical_downtilt_deg: f64,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteConfig {
    pub position: Point3,
    #[serde(default = "default_sectors")]
    pub sectors: Vec<SectorConfig>,
}

/// Axis-aligned building block, extruded from the ground to `height_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingFootprint {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
    pub height_m: f64,
}

impl BuildingFootprint {
    /// Closed containment: points on the boundary count as inside.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    #[serde(default = "default_resolution")]
    pub grid_resolution_m: f64,
    #[serde(default = "default_carrier")]
    pub carrier_freq_hz: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_ue_height")]
    pub ue_height_m: f64,
    /// Log-normal shadowing standard deviation; zero disables it.
    #[serde(default)]
    pub shadowing_sigma_db: f64,
    #[serde(default)]
    pub antenna: AntennaElementParams,
    #[serde(default)]
    pub codebook: CodebookConfig,
    pub sites: Vec<SiteConfig>,
    #[serde(default)]
    pub buildings: Vec<BuildingFootprint>,
}

fn default_resolution() -> f64 {
    1.0
}
fn default_carrier() -> f64 {
    28e9
}
fn default_ue_height() -> f64 {
    1.5
}
fn default_downtilt() -> f64 {
    5.0
}
fn default_tx_power() -> f64 {
    30.0
}
fn default_sectors() -> Vec<SectorConfig> {
    three_sectors(0.0)
}

pub const DEFAULT_SITE_HEIGHT_M: f64 = 10.0;
pub const DEFAULT_ISD_HORIZONTAL_M: f64 = 200.0;
pub const DEFAULT_ISD_VERTICAL_M: f64 = 110.0;

/// Three sectors 120 degrees apart, starting at `first_azimuth_deg`.
pub fn three_sectors(first_azimuth_deg: f64) -> Vec<SectorConfig> {
    (0..3)
        .map(|k| SectorConfig {
            cell_id: None,
            boresight_azimuth_deg: (first_azimuth_deg + 120.0 * k as f64).rem_euclid(360.0),
            mechanical_downtilt_deg: default_downtilt(),
            tx_power_dbm: default_tx_power(),
        })
        .collect()
}

impl Default for ScenarioConfig {
    /// Eight three-sector sites on a 2 x 4 street-corner lattice (200 m horizontal,
    /// 110 m vertical spacing) around a block pattern of 25 m buildings.
    fn default() -> Self {
        let mut sites = Vec::with_capacity(8);
        for row in 0..4 {
            for col in 0..2 {
                let x = col as f64 * DEFAULT_ISD_HORIZONTAL_M;
                let y = row as f64 * DEFAULT_ISD_VERTICAL_M;
                // left column faces east first, right column faces west first
                let first = if col == 0 { 0.0 } else { 180.0 };
                sites.push(SiteConfig {
                    position: Point3::new(x, y, DEFAULT_SITE_HEIGHT_M),
                    sectors: three_sectors(first),
                });
            }
        }
        let mut config = ScenarioConfig {
            area_width_m: DEFAULT_ISD_HORIZONTAL_M,
            area_height_m: 3.0 * DEFAULT_ISD_VERTICAL_M,
            grid_resolution_m: default_resolution(),
            carrier_freq_hz: default_carrier(),
            rng_seed: 2020,
            ue_height_m: default_ue_height(),
            shadowing_sigma_db: 0.0,
            antenna: AntennaElementParams::default(),
            codebook: CodebookConfig::default(),
            sites,
            buildings: default_buildings(),
        };
        assign_cell_ids(&mut config);
        config
    }
}

/// Block pattern between the street grid. Streets run along every site row and column
/// plus a central avenue; each block is quartered by two crossing alleys.
fn default_buildings() -> Vec<BuildingFootprint> {
    let street_half = 9.0;
    let avenue_half = 6.0;
    let alley_half = 3.5;
    let height = 25.0;
    let halves = |lo: f64, hi: f64| {
        let mid = 0.5 * (lo + hi);
        [(lo, mid - alley_half), (mid + alley_half, hi)]
    };
    let mut x_bands = Vec::new();
    x_bands.extend(halves(street_half, 100.0 - avenue_half));
    x_bands.extend(halves(100.0 + avenue_half, DEFAULT_ISD_HORIZONTAL_M - street_half));
    let mut out = Vec::new();
    for row in 0..3 {
        let y0 = row as f64 * DEFAULT_ISD_VERTICAL_M + street_half;
        let y1 = (row + 1) as f64 * DEFAULT_ISD_VERTICAL_M - street_half;
        for (min_y, max_y) in halves(y0, y1) {
            for &(min_x, max_x) in &x_bands {
                out.push(BuildingFootprint {
                    min_x,
                    max_x,
                    min_y,
                    max_y,
                    height_m: height,
                });
            }
        }
    }
    out
}

/// Fills in missing cell ids with the smallest unused positive integers, in site/sector order.
fn assign_cell_ids(config: &mut ScenarioConfig) {
    let used: HashSet<u32> = config
        .sites
        .iter()
        .flat_map(|s| s.sectors.iter().filter_map(|c| c.cell_id))
        .collect();
    let mut next = 1u32;
    for site in &mut config.sites {
        for sector in &mut site.sectors {
            if sector.cell_id.is_none() {
                while used.contains(&next) {
                    next += 1;
                }
                sector.cell_id = Some(next);
                next += 1;
            }
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("scenario encode: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        positive(self.area_width_m, "area_width_m")?;
        positive(self.area_height_m, "area_height_m")?;
        positive(self.grid_resolution_m, "grid_resolution_m")?;
        positive(self.carrier_freq_hz, "carrier_freq_hz")?;
        positive(self.ue_height_m, "ue_height_m")?;
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return Err(Error::Config(format!(
                "shadowing_sigma_db must be >= 0, got {}",
                self.shadowing_sigma_db
            )));
        }
        if self.sites.is_empty() {
            return Err(Error::Config("scenario needs at least one site".into()));
        }
        self.antenna.validate()?;
        self.codebook.validate()?;

        let mut cell_ids = HashSet::new();
        for (i, site) in self.sites.iter().enumerate() {
            let p = site.position;
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Config(format!("site {i} position is not finite")));
            }
            positive(p.z, &format!("site {i} height"))?;
            if site.sectors.is_empty() {
                return Err(Error::Config(format!("site {i} has no sectors")));
            }
            let mut azimuths: Vec<f64> = Vec::new();
            for sector in &site.sectors {
                let az = sector.boresight_azimuth_deg.rem_euclid(360.0);
                if !az.is_finite() || !sector.mechanical_downtilt_deg.is_finite() {
                    return Err(Error::Config(format!("site {i} has a non-finite sector angle")));
                }
                if azimuths.iter().any(|&a| {
                    let d = (a - az).abs();
                    d.min(360.0 - d) < 1e-9
                }) {
                    return Err(Error::Config(format!(
                        "site {i} has duplicate sector azimuth {az} deg"
                    )));
                }
                azimuths.push(az);
                if !sector.tx_power_dbm.is_finite() {
                    return Err(Error::Config(format!("site {i} tx power is not finite")));
                }
                let id = sector
                    .cell_id
                    .ok_or_else(|| Error::Config(format!("site {i} has an unassigned cell id")))?;
                if !cell_ids.insert(id) {
                    return Err(Error::Config(format!("duplicate cell id {id}")));
                }
            }
            for (j, other) in self.sites.iter().enumerate().take(i) {
                if p.distance(&other.position) < 1e-9 {
                    return Err(Error::Config(format!("sites {j} and {i} are co-located at {p}")));
                }
            }
        }

        for (k, b) in self.buildings.iter().enumerate() {
            if !(b.min_x < b.max_x && b.min_y < b.max_y) {
                return Err(Error::Config(format!("building {k} has an empty footprint")));
            }
            positive(b.height_m, &format!("building {k} height"))?;
            for (i, site) in self.sites.iter().enumerate() {
                let p = site.position;
                if b.contains_xy(p.x, p.y) && p.z <= b.height_m {
                    return Err(Error::Config(format!("building {k} covers site {i}")));
                }
            }
        }
        Ok(())
    }
}

/// One sector of a site: the unit that owns a cell id and a beam codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub cell_id: u32,
    pub site_index: usize,
    pub position: Point3,
    pub boresight_azimuth_deg: f64,
    pub mechanical_downtilt_deg: f64,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GridPoint {
    pub fn as_point3(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }
}

/// Validated, immutable scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    cells: Vec<Cell>,
    codebook: BeamCodebook,
    hash: String,
}

/// Validates `config`, assigns missing cell ids and expands sites into cells.
pub fn build_scenario(mut config: ScenarioConfig) -> Result<Scenario> {
    assign_cell_ids(&mut config);
    config.validate()?;
    let cells = config
        .sites
        .iter()
        .enumerate()
        .flat_map(|(site_index, site)| {
            site.sectors.iter().map(move |s| Cell {
                cell_id: s.cell_id.expect("assigned above"),
                site_index,
                position: site.position,
                boresight_azimuth_deg: s.boresight_azimuth_deg,
                mechanical_downtilt_deg: s.mechanical_downtilt_deg,
                tx_power_dbm: s.tx_power_dbm,
            })
        })
        .collect();
    let codebook = BeamCodebook::new(&config.codebook, config.antenna.clone());
    let hash = config_hash(&config);
    Ok(Scenario {
        config,
        cells,
        codebook,
        hash,
    })
}

/// Hex SHA-256 of the canonical JSON encoding of a config.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("scenario config serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        build_scenario(config)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, cell_id: u32) -> Option<&Cell> {
        self.cells.iter().find(|c| c.cell_id == cell_id)
    }

    pub fn codebook(&self) -> &BeamCodebook {
        &self.codebook
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn buildings(&self) -> &[BuildingFootprint] {
        &self.config.buildings
    }

    fn axis_count(extent: f64, resolution: f64) -> usize {
        (extent / resolution + 1e-9).floor() as usize + 1
    }

    /// Inclusive lattice size (columns, rows) before building exclusion.
    pub fn lattice_dims(&self) -> (usize, usize) {
        let c = &self.config;
        (
            Self::axis_count(c.area_width_m, c.grid_resolution_m),
            Self::axis_count(c.area_height_m, c.grid_resolution_m),
        )
    }

    /// Outdoor sampling locations, row-major (y outer, x inner), both area edges included.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let c = &self.config;
        let (nx, ny) = self.lattice_dims();
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = j as f64 * c.grid_resolution_m;
            for i in 0..nx {
                let x = i as f64 * c.grid_resolution_m;
                if c.buildings.iter().any(|b| b.contains_xy(x, y)) {
                    continue;
                }
                out.push(GridPoint {
                    x,
                    y,
                    z: c.ue_height_m,
                });
            }
        }
        out
    }

    /// True iff the segment `tx -> rx` touches no building box. Grazing contact blocks.
    pub fn line_of_sight(&self, tx: Point3, rx: Point3) -> bool {
        // evaluate in a canonical endpoint order so the answer is exactly symmetric
        let (a, b) = if (tx.x, tx.y, tx.z) <= (rx.x, rx.y, rx.z) {
            (tx, rx)
        } else {
            (rx, tx)
        };
        !self
            .config
            .buildings
            .iter()
            .any(|bld| segment_hits_box(a, b, bld))
    }
}

/// Slab test of the closed segment `a -> b` against the closed building box.
pub fn segment_hits_box(a: Point3, b: Point3, bld: &BuildingFootprint) -> bool {
    let origin = [a.x, a.y, a.z];
    let dir = [b.x - a.x, b.y - a.y, b.z - a.z];
    let lo = [bld.min_x, bld.min_y, 0.0];
    let hi = [bld.max_x, bld.max_y, bld.height_m];
    let mut t_enter = 0.0f64;
    let mut t_exit = 1.0f64;
    for axis in 0..3 {
        if dir[axis] == 0.0 {
            if origin[axis] < lo[axis] || origin[axis] > hi[axis] {
                return false;
            }
            continue;
        }
        let inv = 1.0 / dir[axis];
        let mut t0 = (lo[axis] - origin[axis]) * inv;
        let mut t1 = (hi[axis] - origin[axis]) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return false;
        }
    }
    true
}
