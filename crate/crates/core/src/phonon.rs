//! Weak-coupling estimate of phonon-induced pure dephasing and the
//! super-ohmic phonon spectral function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{thermal_energy, HBAR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononParams {
    /// Coupling strength α (ps²).
    pub alpha: f64,
    /// Temperature (K).
    pub temperature: f64,
    /// Cutoff ω_b (μeV).
    pub omega_b: f64,
}

impl Default for PhononParams {
    fn default() -> Self {
        PhononParams {
            alpha: 0.1,
            temperature: 4.2,
            omega_b: 900.0,
        }
    }
}

impl PhononParams {
    pub fn new(alpha: f64, temperature: f64, omega_b: f64) -> Result<Self> {
        let ph = PhononParams {
            alpha,
            temperature,
            omega_b,
        };
        ph.validate()?;
        Ok(ph)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", "must be finite and >= 0"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be finite and > 0"));
        }
        if !(self.omega_b.is_finite() && self.omega_b > 0.0) {
            return Err(Error::invalid("omega_b", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// γ′_ph ≈ π k_B T α Ω² for a resonant drive of Rabi energy `omega_rabi`
/// (μeV). Returned in μeV.
///
/// With two drives the relevant Ω is ambiguous; max(Ω₁, Ω₂) gives a
/// conservative floor.
pub fn dephasing_rate(ph: &PhononParams, omega_rabi: f64) -> f64 {
    let kt = thermal_energy(ph.temperature) / HBAR;
    let w = omega_rabi / HBAR;
    std::f64::consts::PI * kt * ph.alpha * w * w * HBAR
}

/// J(ω) = α ω³ exp(−ω²/2ω_b²) with ω and ω_b converted to rad/ps, so the
/// result is in ps⁻¹. Zero for ω ≤ 0.
pub fn spectral_function(omega: f64, ph: &PhononParams) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    let w = omega / HBAR;
    let wb = ph.omega_b / HBAR;
    ph.alpha * w.powi(3) * (-0.5 * (w / wb).powi(2)).exp()
}
