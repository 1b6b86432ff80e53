//! Physical constants in km, s.

/// Earth gravitational parameter used by the planar Kepler scenario, km³/s².
pub const MU_EARTH: f64 = 3.986e5;
/// Earth radius used by the planar Kepler scenario, km.
pub const R_EARTH: f64 = 6378.0;

/// Earth gravitational parameter for the orbital scenarios, km³/s².
pub const MU_EARTH_PRECISE: f64 = 3.986004418e5;
/// Equatorial radius for the orbital scenarios, km.
pub const R_EARTH_EQ: f64 = 6378.137;
/// Second zonal harmonic.
pub const J2_EARTH: f64 = 1.0826269e-3;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
