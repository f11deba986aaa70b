//! Geographic cell grid, population ingestion and active-user counts.

use std::io::BufRead;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::constants::EARTH_RADIUS_M;
use crate::error::SimError;
use crate::geo::LatLon;

/// Rectangular lat/lon region tiled by square cells of `cell_step_deg`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Region {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
    pub cell_step_deg: f64,
}

impl Region {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.lat_min_deg >= self.lat_max_deg || self.lon_min_deg >= self.lon_max_deg {
            return Err(SimError::BadGrid("empty region".into()));
        }
        if self.cell_step_deg <= 0.0 {
            return Err(SimError::BadGrid("cell step must be positive".into()));
        }
        for (span, name) in [
            (self.lat_max_deg - self.lat_min_deg, "latitude"),
            (self.lon_max_deg - self.lon_min_deg, "longitude"),
        ] {
            let n = span / self.cell_step_deg;
            if (n - n.round()).abs() > 1e-9 {
                return Err(SimError::BadGrid(format!(
                    "{name} span {span} is not a multiple of step {}",
                    self.cell_step_deg
                )));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        ((self.lat_max_deg - self.lat_min_deg) / self.cell_step_deg).round() as usize
    }

    pub fn cols(&self) -> usize {
        ((self.lon_max_deg - self.lon_min_deg) / self.cell_step_deg).round() as usize
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat_min_deg
            && lat < self.lat_max_deg
            && lon >= self.lon_min_deg
            && lon < self.lon_max_deg
    }

    /// Region area in km^2 on the spherical Earth.
    pub fn area_km2(&self) -> f64 {
        let re_km = EARTH_RADIUS_M / 1000.0;
        let lat0 = self.lat_min_deg.to_radians();
        let lat1 = self.lat_max_deg.to_radians();
        let dlon = (self.lon_max_deg - self.lon_min_deg).to_radians();
        re_km * re_km * dlon * (lat1.sin() - lat0.sin())
    }

    pub fn center(&self) -> LatLon {
        LatLon::new(
            0.5 * (self.lat_min_deg + self.lat_max_deg),
            0.5 * (self.lon_min_deg + self.lon_max_deg),
        )
    }
}

/// One geographic cell with its population and active-user count.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: usize,
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
    pub population: u64,
    pub active_fraction: f64,
    pub active_users: u64,
    /// Anchor node location (cell centroid).
    pub anchor: LatLon,
}

impl Cell {
    pub fn centroid(&self) -> LatLon {
        LatLon::new(
            0.5 * (self.lat_min_deg + self.lat_max_deg),
            0.5 * (self.lon_min_deg + self.lon_max_deg),
        )
    }

    pub fn corners(&self) -> [LatLon; 4] {
        [
            LatLon::new(self.lat_min_deg, self.lon_min_deg),
            LatLon::new(self.lat_min_deg, self.lon_max_deg),
            LatLon::new(self.lat_max_deg, self.lon_min_deg),
            LatLon::new(self.lat_max_deg, self.lon_max_deg),
        ]
    }
}

/// Row-major grid of cells over a [`Region`].
#[derive(Debug, Clone)]
pub struct CellGrid {
    pub region: Region,
    pub cells: Vec<Cell>,
}

impl CellGrid {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index containing (lat, lon), if inside the region.
    pub fn cell_index(&self, lat: f64, lon: f64) -> Option<usize> {
        if !self.region.contains(lat, lon) {
            return None;
        }
        let step = self.region.cell_step_deg;
        let row = ((lat - self.region.lat_min_deg) / step) as usize;
        let col = ((lon - self.region.lon_min_deg) / step) as usize;
        Some(row * self.region.cols() + col)
    }

    /// Indices of cells with at least one active user. Zero-population cells
    /// carry no objective weight and are excluded from the allocator.
    pub fn active_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| c.active_users > 0)
            .map(|c| c.id)
            .collect()
    }

    pub fn total_population(&self) -> u64 {
        self.cells.iter().map(|c| c.population).sum()
    }

    fn set_population(&mut self, counts: &[u64]) {
        for (cell, &n) in self.cells.iter_mut().zip(counts) {
            cell.population = n;
            cell.active_users = active_users(n, cell.active_fraction);
        }
    }
}

/// M_c = ceil(mu_c * M_c_max). The ceiling keeps tiny populated cells active.
pub fn active_users(population: u64, active_fraction: f64) -> u64 {
    (active_fraction * population as f64).ceil() as u64
}

/// Builds the row-major grid of cells; the grid convention is half-open boxes
/// [lat, lat+step) x [lon, lon+step) so each point maps to exactly one cell.
pub fn build_grid(region: Region, active_fraction: f64) -> Result<CellGrid, SimError> {
    region.validate()?;
    let (rows, cols) = (region.rows(), region.cols());
    let step = region.cell_step_deg;
    let mut cells = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let lat_min = region.lat_min_deg + r as f64 * step;
            let lon_min = region.lon_min_deg + c as f64 * step;
            let mut cell = Cell {
                id: r * cols + c,
                lat_min_deg: lat_min,
                lat_max_deg: lat_min + step,
                lon_min_deg: lon_min,
                lon_max_deg: lon_min + step,
                population: 0,
                active_fraction,
                active_users: 0,
                anchor: LatLon::new(0.0, 0.0),
            };
            cell.anchor = cell.centroid();
            cells.push(cell);
        }
    }
    Ok(CellGrid { region, cells })
}

/// Outcome of a population ingestion pass.
#[derive(Debug, Clone, Copy, Default)]
pub struct IngestReport {
    pub records: usize,
    pub out_of_region: usize,
    pub out_of_region_count: u64,
}

/// Loads a `lat,lon,count` delimited table and accumulates counts into the
/// containing cells. Records outside the region are counted, not fatal.
pub fn load_population<R: BufRead>(grid: &mut CellGrid, source: R) -> Result<IngestReport, SimError> {
    let mut counts = vec![0u64; grid.len()];
    let mut report = IngestReport::default();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.to_ascii_lowercase().starts_with("lat") {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(SimError::Population(format!(
                "line {}: expected lat,lon,count, got '{line}'",
                lineno + 1
            )));
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| SimError::Population(format!("line {}: bad {what} '{s}'", lineno + 1)))
        };
        let lat = parse(fields[0], "latitude")?;
        let lon = parse(fields[1], "longitude")?;
        let count = fields[2].parse::<u64>().map_err(|_| {
            SimError::Population(format!("line {}: bad count '{}'", lineno + 1, fields[2]))
        })?;
        report.records += 1;
        match grid.cell_index(lat, lon) {
            Some(idx) => counts[idx] += count,
            None => {
                report.out_of_region += 1;
                report.out_of_region_count += count;
            }
        }
    }
    grid.set_population(&counts);
    Ok(report)
}

/// Synthetic log-normal population, a desk-scale substitute for a raster
/// export. A deterministic fraction of cells is masked to zero to mimic sea
/// or unpopulated areas.
pub fn synth_population<RNG: Rng>(
    grid: &mut CellGrid,
    rng: &mut RNG,
    mean: f64,
    dispersion: f64,
    zero_fraction: f64,
) -> Result<(), SimError> {
    if mean <= 0.0 {
        return Err(SimError::Config("synthetic population mean must be > 0".into()));
    }
    let n = grid.len();
    let mut counts = vec![0u64; n];
    if dispersion <= 0.0 {
        counts.fill(mean.ceil() as u64);
    } else {
        // Log-normal with the requested mean: mu = ln(mean) - sigma^2/2.
        let sigma = dispersion;
        let mu = mean.ln() - 0.5 * sigma * sigma;
        let dist = LogNormal::new(mu, sigma)
            .map_err(|e| SimError::Config(format!("log-normal parameters: {e}")))?;
        for c in counts.iter_mut() {
            *c = dist.sample(rng).round() as u64;
        }
    }
    // Deterministic masking: exactly floor(zero_fraction * n) cells, chosen by
    // a seeded shuffle of the indices.
    let zeros = (zero_fraction * n as f64).floor() as usize;
    if zeros > 0 {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for &idx in order.iter().take(zeros) {
            counts[idx] = 0;
        }
    }
    grid.set_population(&counts);
    Ok(())
}
