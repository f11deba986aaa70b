//! Spherical-Earth geometry helpers: geodetic/ECEF conversion, elevation
//! angles and a local planar projection used by the rain field.

use crate::constants::EARTH_RADIUS_M;

/// Geodetic point in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl LatLon {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    /// Earth-fixed Cartesian position on the sphere of radius `radius_m`.
    pub fn to_ecef(self, radius_m: f64) -> [f64; 3] {
        let lat = self.lat_deg.to_radians();
        let lon = self.lon_deg.to_radians();
        [
            radius_m * lat.cos() * lon.cos(),
            radius_m * lat.cos() * lon.sin(),
            radius_m * lat.sin(),
        ]
    }
}

pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(sub(a, b))
}

/// Elevation angle of a satellite above the local horizon of a ground point,
/// in degrees. The ground point must lie on the Earth sphere.
pub fn elevation_deg(ground_ecef: [f64; 3], sat_ecef: [f64; 3]) -> f64 {
    let los = sub(sat_ecef, ground_ecef);
    let r = norm(ground_ecef);
    let up = [ground_ecef[0] / r, ground_ecef[1] / r, ground_ecef[2] / r];
    (dot(los, up) / norm(los)).asin().to_degrees()
}

/// Equirectangular projection around a reference point, in kilometers.
/// Adequate at the few-hundred-km scale of a rain field.
#[derive(Debug, Clone, Copy)]
pub struct PlanarProjection {
    ref_lat_deg: f64,
    ref_lon_deg: f64,
    cos_ref_lat: f64,
}

impl PlanarProjection {
    pub fn new(reference: LatLon) -> Self {
        Self {
            ref_lat_deg: reference.lat_deg,
            ref_lon_deg: reference.lon_deg,
            cos_ref_lat: reference.lat_deg.to_radians().cos(),
        }
    }

    /// (east, north) in km.
    pub fn to_km(&self, p: LatLon) -> [f64; 2] {
        let re_km = EARTH_RADIUS_M / 1000.0;
        [
            re_km * (p.lon_deg - self.ref_lon_deg).to_radians() * self.cos_ref_lat,
            re_km * (p.lat_deg - self.ref_lat_deg).to_radians(),
        ]
    }
}

pub fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ecef_roundtrip_norm() {
        let p = LatLon::new(47.0, 8.0).to_ecef(EARTH_RADIUS_M);
        assert_relative_eq!(norm(p), EARTH_RADIUS_M, epsilon = 1e-6);
    }

    #[test]
    fn zenith_elevation_is_90() {
        let g = LatLon::new(47.0, 8.0);
        let ground = g.to_ecef(EARTH_RADIUS_M);
        let sat = g.to_ecef(EARTH_RADIUS_M + 550e3);
        assert_relative_eq!(elevation_deg(ground, sat), 90.0, epsilon = 1e-6);
    }

    #[test]
    fn planar_projection_scale() {
        let proj = PlanarProjection::new(LatLon::new(47.0, 8.0));
        // One degree of latitude is ~111.2 km on the sphere.
        let p = proj.to_km(LatLon::new(48.0, 8.0));
        assert_relative_eq!(p[1], EARTH_RADIUS_M / 1000.0 * 1f64.to_radians(), epsilon = 1e-9);
        assert_relative_eq!(p[0], 0.0, epsilon = 1e-12);
    }
}
