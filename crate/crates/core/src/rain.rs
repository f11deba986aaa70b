//! Clustered rain field: Poisson-placed rain cells with exponential radius
//! and intensity marks, a two-state on/off DTMC per cell, and the power-law
//! rain attenuation.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::geo::{planar_distance, PlanarProjection};
use crate::ground::CellGrid;

/// Power-law coefficients A_dB = mu * rate^omega * d_km for one carrier
/// frequency/polarization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawCoeff {
    pub mu: f64,
    pub omega: f64,
}

/// Rain model parameters (all strictly positive).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RainParams {
    /// PPP intensity, rain cells per km^2.
    pub lambda_per_km2: f64,
    /// Mean of the exponential radius mark, km. See `mark_is_diameter`.
    pub mean_radius_km: f64,
    /// Mean rain intensity, mm/h.
    pub mean_rate_mm_h: f64,
    /// Mean active duration, hours.
    pub mean_on_h: f64,
    /// Mean inactive duration, hours.
    pub mean_off_h: f64,
    /// Rain height (0 C isotherm), km.
    pub rain_height_km: f64,
    /// When true, the exponential mark is interpreted as the cell diameter
    /// instead of the radius. Default false (mark = radius).
    #[serde(default)]
    pub mark_is_diameter: bool,
}

impl RainParams {
    pub fn validate(&self) -> Result<(), crate::SimError> {
        let all = [
            self.lambda_per_km2,
            self.mean_radius_km,
            self.mean_rate_mm_h,
            self.mean_on_h,
            self.mean_off_h,
            self.rain_height_km,
        ];
        if all.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(crate::SimError::Config(
                "rain parameters must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// DTMC transition and steady-state probabilities for one frame length.
#[derive(Debug, Clone, Copy)]
pub struct DtmcProbs {
    pub p_on: f64,
    pub p_off: f64,
    pub pi_on: f64,
}

/// p_off = 1 - exp(-T_F/eps), p_on = 1 - exp(-T_F/beta),
/// pi_on = p_on / (p_on + p_off). `t_frame_s` is in seconds, the means in
/// hours.
pub fn dtmc_probs(params: &RainParams, t_frame_s: f64) -> DtmcProbs {
    let tf_h = t_frame_s / 3600.0;
    let p_off = 1.0 - (-tf_h / params.mean_on_h).exp();
    let p_on = 1.0 - (-tf_h / params.mean_off_h).exp();
    DtmcProbs { p_on, p_off, pi_on: p_on / (p_on + p_off) }
}

/// One rain cell: planar center, radius, intensity and on/off state.
#[derive(Debug, Clone, Copy)]
pub struct RainCell {
    pub center_km: [f64; 2],
    pub radius_km: f64,
    pub rate_mm_h: f64,
    pub active: bool,
}

/// Rain field for one frame, with the per-user-cell coverage sets frozen at
/// construction (centers/radii never change, only the on/off states do).
#[derive(Debug, Clone)]
pub struct RainField {
    pub cells: Vec<RainCell>,
    /// For each user cell, indices of the rain cells covering its centroid.
    pub coverage: Vec<Vec<usize>>,
    pub frame: u64,
}

impl RainField {
    pub fn any_rain(&self, user_cell: usize) -> bool {
        self.coverage[user_cell].iter().any(|&r| self.cells[r].active)
    }
}

/// Draws the rain field over the region plus a 3 * d_rain guard margin so
/// border cells see unbiased coverage. Initial states are Bernoulli(pi_on).
pub fn init_field<R: Rng>(
    grid: &CellGrid,
    params: &RainParams,
    t_frame_s: f64,
    rng: &mut R,
) -> RainField {
    let proj = PlanarProjection::new(grid.region.center());
    // Planar bounding box of the region corners plus the guard margin.
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for lat in [grid.region.lat_min_deg, grid.region.lat_max_deg] {
        for lon in [grid.region.lon_min_deg, grid.region.lon_max_deg] {
            let p = proj.to_km(crate::geo::LatLon::new(lat, lon));
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
    }
    let margin = 3.0 * params.mean_radius_km;
    for i in 0..2 {
        lo[i] -= margin;
        hi[i] += margin;
    }
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);

    let n: u64 = Poisson::new(params.lambda_per_km2 * area)
        .expect("positive Poisson mean")
        .sample(rng) as u64;
    let radius_dist = Exp::new(1.0 / params.mean_radius_km).expect("positive rate");
    let rate_dist = Exp::new(1.0 / params.mean_rate_mm_h).expect("positive rate");
    let probs = dtmc_probs(params, t_frame_s);

    let mut cells = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let center = [
            rng.random_range(lo[0]..hi[0]),
            rng.random_range(lo[1]..hi[1]),
        ];
        let mark: f64 = radius_dist.sample(rng);
        let radius = if params.mark_is_diameter { mark / 2.0 } else { mark };
        cells.push(RainCell {
            center_km: center,
            radius_km: radius.max(f64::MIN_POSITIVE),
            rate_mm_h: rate_dist.sample(rng).max(f64::MIN_POSITIVE),
            active: rng.random_bool(probs.pi_on),
        });
    }

    // Coverage sets: rain cell r covers user cell c iff the distance from the
    // rain-cell center to the user-cell centroid is within the radius.
    let coverage = grid
        .cells
        .iter()
        .map(|cell| {
            let p = proj.to_km(cell.centroid());
            cells
                .iter()
                .enumerate()
                .filter(|(_, rc)| planar_distance(rc.center_km, p) <= rc.radius_km)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    RainField { cells, coverage, frame: 0 }
}

/// Advances the on/off DTMC by one frame. Geometry and intensities persist.
pub fn step<R: Rng>(field: &mut RainField, probs: DtmcProbs, rng: &mut R) {
    for cell in field.cells.iter_mut() {
        let flip = if cell.active { probs.p_off } else { probs.p_on };
        if rng.random_bool(flip) {
            cell.active = !cell.active;
        }
    }
    field.frame += 1;
}

/// Rain rate at a user cell: sum of the rates of active covering rain cells.
pub fn rain_rate(field: &RainField, user_cell: usize) -> f64 {
    field.coverage[user_cell]
        .iter()
        .map(|&r| {
            let rc = &field.cells[r];
            if rc.active {
                rc.rate_mm_h
            } else {
                0.0
            }
        })
        .sum()
}

/// Rain attenuation in dB over a slanted wet path:
/// A_dB = mu * rate^omega * d_km with d_km = min(slant range, h_r / sin(el)).
/// Zero rain gives exactly 0 dB (linear attenuation 1).
pub fn rain_attenuation_db(
    coeff: PowerLawCoeff,
    elevation_deg: f64,
    rate_mm_h: f64,
    rain_height_km: f64,
    slant_range_km: f64,
) -> f64 {
    if rate_mm_h <= 0.0 {
        return 0.0;
    }
    let wet_path = wet_path_km(elevation_deg, rain_height_km, slant_range_km);
    coeff.mu * rate_mm_h.powf(coeff.omega) * wet_path
}

/// Wet-path length min(slant range, h_r / sin(elevation)) in km.
pub fn wet_path_km(elevation_deg: f64, rain_height_km: f64, slant_range_km: f64) -> f64 {
    let s = elevation_deg.to_radians().sin();
    if s <= 0.0 {
        return slant_range_km;
    }
    slant_range_km.min(rain_height_km / s)
}

/// Inverts the power law: rate = (A_dB / (mu * d_km))^(1/omega). This is the
/// sensing-as-a-service output.
pub fn invert_power_law(atten_db: f64, coeff: PowerLawCoeff, wet_path_km: f64) -> f64 {
    if atten_db <= 0.0 {
        return 0.0;
    }
    (atten_db / (coeff.mu * wet_path_km)).powf(1.0 / coeff.omega)
}
