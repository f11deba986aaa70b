//! Physical constants used throughout the simulator.

/// Standard gravitational parameter G*M_E in m^3/s^2.
pub const GM_EARTH: f64 = 3.986e14;

/// Mean Earth radius in meters (spherical Earth model).
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Earth rotation rate in rad/s (sidereal).
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115e-5;
