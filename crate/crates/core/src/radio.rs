//! Antenna element and SSB beam patterns, free-space path loss and per-beam RSRP.
//!
//! Angles are in degrees. A sector frame has its x axis on the (down-tilted) boresight,
//! z up; azimuth is measured counter-clockwise from boresight and elevation is positive
//! above the boresight plane.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Cell, Point3, Scenario};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaElementParams {
    pub max_gain_dbi: f64,
    pub azimuth_3db_beamwidth_deg: f64,
    pub elevation_3db_beamwidth_deg: f64,
    pub front_to_back_db: f64,
}

impl Default for AntennaElementParams {
    fn default() -> Self {
        AntennaElementParams {
            max_gain_dbi: 8.0,
            azimuth_3db_beamwidth_deg: 65.0,
            elevation_3db_beamwidth_deg: 65.0,
            front_to_back_db: 30.0,
        }
    }
}

impl AntennaElementParams {
    pub fn validate(&self) -> Result<()> {
        let bw_ok = |bw: f64| bw > 0.0 && bw < 180.0;
        if !bw_ok(self.azimuth_3db_beamwidth_deg) || !bw_ok(self.elevation_3db_beamwidth_deg) {
            return Err(Error::Config("element beamwidths must lie in (0, 180)".into()));
        }
        if !(self.front_to_back_db > 0.0) || !self.max_gain_dbi.is_finite() {
            return Err(Error::Config("front_to_back_db must be > 0 and gain finite".into()));
        }
        Ok(())
    }
}

/// Parabolic single-element pattern, attenuation clamped at the front-to-back ratio.
pub fn element_gain_db(params: &AntennaElementParams, az_offset_deg: f64, el_offset_deg: f64) -> f64 {
    let a = az_offset_deg / params.azimuth_3db_beamwidth_deg;
    let e = el_offset_deg / params.elevation_3db_beamwidth_deg;
    let attenuation = (12.0 * a * a + 12.0 * e * e).min(params.front_to_back_db);
    params.max_gain_dbi - attenuation
}

/// Steering grid and synthesized main-lobe parameters for one sector's SSB beams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodebookConfig {
    pub n_azimuth: u32,
    pub n_elevation: u32,
    /// Total azimuth coverage, centred on boresight.
    pub azimuth_span_deg: f64,
    /// Steering elevation of the top row (relative to the tilted boresight).
    pub elevation_top_deg: f64,
    /// Steering elevation of the bottom row.
    pub elevation_bottom_deg: f64,
    pub beamwidth_az_deg: f64,
    pub beamwidth_el_deg: f64,
    pub array_gain_db: f64,
    pub sidelobe_floor_db: f64,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        CodebookConfig {
            n_azimuth: 16,
            n_elevation: 2,
            azimuth_span_deg: 120.0,
            elevation_top_deg: 0.0,
            elevation_bottom_deg: -20.0,
            beamwidth_az_deg: 7.0,
            beamwidth_el_deg: 30.0,
            array_gain_db: 10.0 * 256f64.log10(),
            sidelobe_floor_db: 25.0,
        }
    }
}

impl CodebookConfig {
    pub fn beam_count(&self) -> usize {
        (self.n_azimuth * self.n_elevation) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_azimuth == 0 || self.n_elevation == 0 {
            return Err(Error::Config("codebook needs at least one beam".into()));
        }
        if !(self.azimuth_span_deg > 0.0 && self.azimuth_span_deg <= 120.0) {
            return Err(Error::Config(
                "codebook azimuth span must lie in (0, 120] degrees".into(),
            ));
        }
        if !(self.beamwidth_az_deg > 0.0 && self.beamwidth_el_deg > 0.0) {
            return Err(Error::Config("synthesized beamwidths must be positive".into()));
        }
        if !(self.sidelobe_floor_db > 0.0)
            || !self.array_gain_db.is_finite()
            || !self.elevation_top_deg.is_finite()
            || !self.elevation_bottom_deg.is_finite()
        {
            return Err(Error::Config("codebook gains/angles must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub beam_id: u32,
    pub steer_azimuth_deg: f64,
    pub steer_elevation_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodebook {
    pub beams: Vec<Beam>,
    pub element: AntennaElementParams,
    pub beamwidth_az_deg: f64,
    pub beamwidth_el_deg: f64,
    pub array_gain_db: f64,
    pub sidelobe_floor_db: f64,
}

impl BeamCodebook {
    /// Beam ids run row by row: `beam_id = elevation_row * n_azimuth + azimuth_column`.
    pub fn new(config: &CodebookConfig, element: AntennaElementParams) -> Self {
        let n_az = config.n_azimuth as usize;
        let n_el = config.n_elevation as usize;
        let mut beams = Vec::with_capacity(n_az * n_el);
        for row in 0..n_el {
            let el = if n_el == 1 {
                0.5 * (config.elevation_top_deg + config.elevation_bottom_deg)
            } else {
                config.elevation_top_deg
                    + (config.elevation_bottom_deg - config.elevation_top_deg) * row as f64
                        / (n_el - 1) as f64
            };
            for col in 0..n_az {
                let az = -0.5 * config.azimuth_span_deg
                    + config.azimuth_span_deg * (col as f64 + 0.5) / n_az as f64;
                beams.push(Beam {
                    beam_id: (row * n_az + col) as u32,
                    steer_azimuth_deg: az,
                    steer_elevation_deg: el,
                });
            }
        }
        BeamCodebook {
            beams,
            element,
            beamwidth_az_deg: config.beamwidth_az_deg,
            beamwidth_el_deg: config.beamwidth_el_deg,
            array_gain_db: config.array_gain_db,
            sidelobe_floor_db: config.sidelobe_floor_db,
        }
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// Main-lobe attenuation of `beam` towards (az, el), before the element pattern.
    pub fn steering_loss_db(&self, beam: &Beam, az_deg: f64, el_deg: f64) -> f64 {
        let a = wrap_deg(az_deg - beam.steer_azimuth_deg) / self.beamwidth_az_deg;
        let e = (el_deg - beam.steer_elevation_deg) / self.beamwidth_el_deg;
        (12.0 * a * a + 12.0 * e * e).min(self.sidelobe_floor_db)
    }
}

/// Wraps an angle into [-180, 180).
pub fn wrap_deg(angle: f64) -> f64 {
    (angle + 180.0).rem_euclid(360.0) - 180.0
}

/// Gain of `beam` towards the sector-frame direction (az, el).
pub fn beam_gain_db(codebook: &BeamCodebook, beam: &Beam, az_deg: f64, el_deg: f64) -> f64 {
    element_gain_db(&codebook.element, az_deg, el_deg) + codebook.array_gain_db
        - codebook.steering_loss_db(beam, az_deg, el_deg)
}

/// Free-space path loss, dB.
pub fn path_loss_db(freq_hz: f64, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::Domain(format!(
            "path loss needs a positive distance, got {distance_m}"
        )));
    }
    if !(freq_hz > 0.0 && freq_hz.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {freq_hz}")));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance_m * freq_hz / SPEED_OF_LIGHT_M_S).log10())
}

/// Direction from a cell to a point in the cell's sector frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorDirection {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance_m: f64,
}

/// Rotates the site-to-point vector by the boresight azimuth, then by the downtilt.
pub fn sector_direction(cell: &Cell, point: Point3) -> SectorDirection {
    let dx = point.x - cell.position.x;
    let dy = point.y - cell.position.y;
    let dz = point.z - cell.position.z;
    let (s_az, c_az) = cell.boresight_azimuth_deg.to_radians().sin_cos();
    let x1 = dx * c_az + dy * s_az;
    let y1 = -dx * s_az + dy * c_az;
    let (s_t, c_t) = cell.mechanical_downtilt_deg.to_radians().sin_cos();
    let x2 = x1 * c_t - dz * s_t;
    let z2 = x1 * s_t + dz * c_t;
    SectorDirection {
        azimuth_deg: y1.atan2(x2).to_degrees(),
        elevation_deg: z2.atan2(x2.hypot(y1)).to_degrees(),
        distance_m: (dx * dx + dy * dy + dz * dz).sqrt(),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Log-normal shadowing for a (cell, location) link; depends only on its arguments.
pub fn shadowing_db(seed: u64, cell_id: u32, x: f64, y: f64, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ u64::from(cell_id));
    h = splitmix64(h ^ x.to_bits());
    h = splitmix64(h ^ y.to_bits());
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let z: f64 = StandardNormal.sample(&mut rng);
    sigma_db * z
}

/// Beam-independent part of the link budget from one cell to one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLink {
    pub direction: SectorDirection,
    /// Tx power minus path loss plus shadowing, dBm.
    pub base_dbm: f64,
}

pub fn cell_link(scenario: &Scenario, cell: &Cell, point: Point3, seed: u64) -> Result<CellLink> {
    let direction = sector_direction(cell, point);
    let pl = path_loss_db(scenario.config().carrier_freq_hz, direction.distance_m)?;
    let shadow = shadowing_db(
        seed,
        cell.cell_id,
        point.x,
        point.y,
        scenario.config().shadowing_sigma_db,
    );
    Ok(CellLink {
        direction,
        base_dbm: cell.tx_power_dbm - pl + shadow,
    })
}

impl CellLink {
    pub fn beam_rsrp_dbm(&self, codebook: &BeamCodebook, beam: &Beam) -> f64 {
        self.base_dbm
            + beam_gain_db(
                codebook,
                beam,
                self.direction.azimuth_deg,
                self.direction.elevation_deg,
            )
    }
}

/// RSRP of one beam of one cell at `point`, shadowing seeded by the scenario's `rng_seed`.
pub fn rsrp_dbm(scenario: &Scenario, cell: &Cell, beam: &Beam, point: Point3) -> Result<f64> {
    rsrp_dbm_seeded(scenario, cell, beam, point, scenario.config().rng_seed)
}

pub fn rsrp_dbm_seeded(
    scenario: &Scenario,
    cell: &Cell,
    beam: &Beam,
    point: Point3,
    seed: u64,
) -> Result<f64> {
    Ok(cell_link(scenario, cell, point, seed)?.beam_rsrp_dbm(scenario.codebook(), beam))
}
