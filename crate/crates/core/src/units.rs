//! Unit system: energies in μeV, times in ps, angular frequencies in rad/ps.

/// Reduced Planck constant in μeV·ps.
pub const HBAR: f64 = 658.211_956_9;

/// Boltzmann constant in μeV/K.
pub const KB: f64 = 86.173_332_62;

/// Energy (μeV) to angular frequency (rad/ps).
#[inline]
pub fn energy_to_angular(e: f64) -> f64 {
    e / HBAR
}

/// Angular frequency (rad/ps) to energy (μeV).
#[inline]
pub fn angular_to_energy(w: f64) -> f64 {
    w * HBAR
}

/// Thermal energy k_B·T in μeV.
#[inline]
pub fn thermal_energy(temperature_k: f64) -> f64 {
    KB * temperature_k
}
