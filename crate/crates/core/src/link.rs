//! Per-(satellite, cell, frame) link budget: free-space path loss, SNR and
//! the range-gated achievable rate. Budget arithmetic is done in dB and
//! converted to linear once.

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::geo;
use crate::ground::CellGrid;
use crate::orbit::{cell_distance, slant_range_max, SatelliteState, ShellConfig};
use crate::rain::{rain_attenuation_db, rain_rate, wet_path_km, RainField};

/// Receiver-side noise and loss terms shared by all links.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseModel {
    pub noise_spectral_density_dbm_hz: f64,
    pub pointing_loss_db: f64,
    pub user_gain_dbi: f64,
}

impl NoiseModel {
    /// Noise power in dBm over bandwidth `b_hz`.
    pub fn noise_power_dbm(&self, b_hz: f64) -> f64 {
        self.noise_spectral_density_dbm_hz + 10.0 * b_hz.log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Free-space path loss (4*pi*d*f/c)^2, linear.
pub fn path_loss(d_m: f64, f_hz: f64) -> f64 {
    let x = 4.0 * std::f64::consts::PI * d_m * f_hz / SPEED_OF_LIGHT;
    x * x
}

pub fn path_loss_db(d_m: f64, f_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d_m * f_hz / SPEED_OF_LIGHT).log10()
}

/// Link SNR in dB from the dB-domain budget chain.
pub fn snr_db(
    shell: &ShellConfig,
    path_loss_db: f64,
    atten_db: f64,
    noise: &NoiseModel,
) -> f64 {
    let tx_dbm = 10.0 * (shell.tx_power_w * 1000.0).log10();
    tx_dbm + shell.antenna_gain_dbi + noise.user_gain_dbi
        - path_loss_db
        - atten_db
        - noise.pointing_loss_db
        - noise.noise_power_dbm(shell.bandwidth_hz)
}

/// Shannon rate gated on staying in range for the whole frame.
pub fn achievable_rate(bandwidth_hz: f64, snr_linear: f64, in_range: bool) -> f64 {
    if !in_range || snr_linear <= 0.0 {
        return 0.0;
    }
    bandwidth_hz * (1.0 + snr_linear).log2()
}

/// Budget for one (visible satellite, cell) pair at one frame.
#[derive(Debug, Clone, Copy)]
pub struct LinkState {
    pub sat_id: u32,
    pub shell_idx: usize,
    pub cell_id: usize,
    /// Worst-case distance at frame k, m.
    pub distance_m: f64,
    /// max over frames {k, k+1}, m.
    pub distance_max_m: f64,
    pub elevation_deg: f64,
    pub path_loss_db: f64,
    pub atten_db: f64,
    /// True SNR (with rain attenuation), linear.
    pub snr: f64,
    /// Clear-sky SNR (A = 1), linear.
    pub snr_clear_sky: f64,
    /// True achievable rate, bit/s (0 when gated out of range).
    pub rate_bps: f64,
    pub in_range: bool,
}

/// Frozen per-frame table over (visible satellite, active cell) pairs,
/// row-major: rows are visible satellites, columns the listed cells.
#[derive(Debug, Clone)]
pub struct LinkTable {
    pub frame: u64,
    /// Global satellite ids of the visible satellites (row order).
    pub sat_ids: Vec<u32>,
    pub shell_of_row: Vec<usize>,
    /// Cell ids (column order).
    pub cell_ids: Vec<usize>,
    pub links: Vec<LinkState>,
}

impl LinkTable {
    pub fn rows(&self) -> usize {
        self.sat_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn at(&self, row: usize, col: usize) -> &LinkState {
        &self.links[row * self.cell_ids.len() + col]
    }
}

/// Builds the link table for frame k given the propagated states at k and
/// k+1, the rain field and the cell subset to include.
#[allow(clippy::too_many_arguments)]
pub fn build_link_table(
    frame: u64,
    states_k: &[SatelliteState],
    states_k1: &[SatelliteState],
    visible: &[usize],
    shells: &[ShellConfig],
    grid: &CellGrid,
    cell_ids: &[usize],
    rain: &RainField,
    rain_height_km: f64,
    noise: &NoiseModel,
    min_elevation_deg: f64,
) -> LinkTable {
    let mut links = Vec::with_capacity(visible.len() * cell_ids.len());
    let mut sat_ids = Vec::with_capacity(visible.len());
    let mut shell_of_row = Vec::with_capacity(visible.len());
    for &v in visible {
        let sat = &states_k[v];
        let shell = &shells[sat.shell_idx];
        sat_ids.push(sat.sat_id);
        shell_of_row.push(sat.shell_idx);
        let range = slant_range_max(shell.altitude_m, min_elevation_deg);
        for &cid in cell_ids {
            let cell = &grid.cells[cid];
            let d_k = cell_distance(sat, cell);
            let d_k1 = cell_distance(&states_k1[v], cell);
            let d_max = d_k.max(d_k1);
            let in_range = d_max <= range;
            let ground = cell.centroid().to_ecef(crate::constants::EARTH_RADIUS_M);
            let elevation = geo::elevation_deg(ground, sat.position_m);
            let pl_db = path_loss_db(d_k, shell.carrier_hz);
            let rate_mm_h = rain_rate(rain, cid);
            let atten_db = rain_attenuation_db(
                shell.rain_power_law,
                elevation,
                rate_mm_h,
                rain_height_km,
                d_k / 1000.0,
            );
            let snr = db_to_linear(snr_db(shell, pl_db, atten_db, noise));
            let snr_clear = db_to_linear(snr_db(shell, pl_db, 0.0, noise));
            links.push(LinkState {
                sat_id: sat.sat_id,
                shell_idx: sat.shell_idx,
                cell_id: cid,
                distance_m: d_k,
                distance_max_m: d_max,
                elevation_deg: elevation,
                path_loss_db: pl_db,
                atten_db,
                snr,
                snr_clear_sky: snr_clear,
                rate_bps: achievable_rate(shell.bandwidth_hz, snr, in_range),
                in_range,
            });
        }
    }
    LinkTable { frame, sat_ids, shell_of_row, cell_ids: cell_ids.to_vec(), links }
}

/// Wet-path length for a link, km (exposed for attenuation inversion).
pub fn link_wet_path_km(link: &LinkState, rain_height_km: f64) -> f64 {
    wet_path_km(link.elevation_deg, rain_height_km, link.distance_m / 1000.0)
}
