//! Drive and dissipation parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HBAR;

/// Two coherent drives in the frame rotating at the first laser frequency.
///
/// All energies in μeV. `delta1 = ω_x − ω₁` and `delta2 = ω_x − ω₂`, so the
/// beat frequency is `delta1 − delta2 = ω₂ − ω₁`. The second drive carries an
/// optional relative phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega1: f64,
    pub omega2: f64,
    pub delta1: f64,
    pub delta2: f64,
    #[serde(default)]
    pub phi: f64,
    /// Absolute ω₁ in μeV. Metadata only, never enters the dynamics.
    #[serde(default)]
    pub frame_origin: f64,
}

/// Beat frequency, drive ratio and period derived from a [`DriveParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Δ = Δ₁ − Δ₂ in μeV.
    pub beat: f64,
    /// α_c = Ω₂/Ω₁, `None` when Ω₁ = 0.
    pub alpha_c: Option<f64>,
    /// T = 2πħ/|Δ| in ps.
    pub period: f64,
}

impl DriveParams {
    pub fn new(omega1: f64, omega2: f64, delta1: f64, delta2: f64) -> Result<Self> {
        let p = DriveParams {
            omega1,
            omega2,
            delta1,
            delta2,
            phi: 0.0,
            frame_origin: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_frame_origin(mut self, frame_origin: f64) -> Self {
        self.frame_origin = frame_origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("phi", self.phi),
            ("frame_origin", self.frame_origin),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.omega1 < 0.0 {
            return Err(Error::invalid("omega1", "must be >= 0"));
        }
        if self.omega2 < 0.0 {
            return Err(Error::invalid("omega2", "must be >= 0"));
        }
        Ok(())
    }

    /// Beat frequency Δ = Δ₁ − Δ₂ = ω₂ − ω₁ (μeV).
    #[inline]
    pub fn beat(&self) -> f64 {
        self.delta1 - self.delta2
    }

    pub fn alpha_c(&self) -> Option<f64> {
        (self.omega1 > 0.0).then(|| self.omega2 / self.omega1)
    }

    /// Period of the Hamiltonian in ps.
    pub fn period(&self) -> Result<f64> {
        let beat = self.beat();
        if beat == 0.0 {
            return Err(Error::DegenerateFrequency);
        }
        Ok(2.0 * PI * HBAR / beat.abs())
    }

    /// Exciton frequency ω_x in μeV (absolute, from `frame_origin`).
    pub fn exciton_energy(&self) -> f64 {
        self.frame_origin + self.delta1
    }

    /// The parameter set whose spectrum is the mirror image of this one.
    ///
    /// Complex conjugation of the master equation maps (Δ₁, Δ₂, φ) to
    /// (−Δ₁, −Δ₂, −φ) and sends the correlator to its conjugate, which
    /// reflects the spectrum about ω = ω₁. For Δ₁ = 0 this is exactly the
    /// Δ → −Δ flip.
    pub fn mirrored(&self) -> Self {
        DriveParams {
            delta1: -self.delta1,
            delta2: -self.delta2,
            phi: -self.phi,
            ..*self
        }
    }

    /// Largest energy scale of the drive (μeV).
    pub fn max_energy_scale(&self) -> f64 {
        self.omega1
            .max(self.omega2)
            .max(self.delta1.abs())
            .max(self.delta2.abs())
    }
}

pub fn derived_quantities(p: &DriveParams) -> Result<DerivedQuantities> {
    Ok(DerivedQuantities {
        beat: p.beat(),
        alpha_c: p.alpha_c(),
        period: p.period()?,
    })
}

/// Radiative decay γ and pure dephasing γ′, both in μeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl DissipationParams {
    pub fn new(gamma: f64, gamma_prime: f64) -> Result<Self> {
        let d = DissipationParams { gamma, gamma_prime };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid("gamma", "must be finite and >= 0"));
        }
        if !(self.gamma_prime.is_finite() && self.gamma_prime >= 0.0) {
            return Err(Error::invalid("gamma_prime", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub(crate) fn require_decay(&self) -> Result<()> {
        if self.gamma > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("gamma", "must be > 0 for steady-state and spectrum calculations"))
        }
    }
}
