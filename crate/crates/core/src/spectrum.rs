//! Two-time correlations by quantum regression, averaging over the steady
//! cycle, and the incoherent emission spectrum.
//!
//! The fluctuation correlator is
//! `C(t, τ) = ⟨σ⁺(t)σ⁻(t+τ)⟩ − ⟨σ⁺(t)⟩⟨σ⁻(t+τ)⟩`, obtained by evolving the
//! operator ρ(t)σ⁺ and ρ(t) side by side under the same time-dependent
//! generator. Averaging over K uniform samples of one period gives `C̄(τ)`,
//! and the spectrum is `S(ω) = Re ∫₀^τmax dτ e^{i(ω−ω₁)τ/ħ} C̄(τ)` by the
//! trapezoid rule.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{periodic_steady_state, stationary_state, Liouvillian, PropagatorConfig};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix2, Operator2, C64, G, X};
use crate::ode::integrate;
use crate::params::{DissipationParams, DriveParams};
use crate::units::HBAR;

/// Numerical settings of the spectrum engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub propagator: PropagatorConfig,
    /// K, number of uniform samples of the steady cycle.
    pub period_samples: usize,
    /// Shift of the first sample into the cycle (ps).
    pub sample_offset: f64,
    /// Required |C̄(τ_max)| / |C̄(0)|.
    pub tail_tol: f64,
    /// Correlation window (ps). `None` picks 12ħ/((γ+γ′)/2) and extends it
    /// until the tail condition holds.
    pub tau_max: Option<f64>,
    /// τ grid spacing (ps). `None` uses the largest allowed, πħ/(4·max|ω−ω₁|).
    pub tau_step: Option<f64>,
    /// Half width (μeV) of an optional exponential window e^{−wτ/ħ}.
    pub window_hwhm: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            propagator: PropagatorConfig::default(),
            period_samples: 32,
            sample_offset: 0.0,
            tail_tol: 1e-4,
            tau_max: None,
            tau_step: None,
            window_hwhm: None,
        }
    }
}

/// How many times an automatic τ_max is doubled before giving up.
const TAU_MAX_EXTENSIONS: usize = 4;

impl SpectrumConfig {
    pub fn validate(&self) -> Result<()> {
        self.propagator.validate()?;
        if self.period_samples == 0 {
            return Err(Error::invalid("period_samples", "must be >= 1"));
        }
        if !(self.sample_offset.is_finite() && self.sample_offset >= 0.0) {
            return Err(Error::invalid("sample_offset", "must be finite and >= 0"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::invalid("tail_tol", "must be positive"));
        }
        for (name, v) in [
            ("tau_max", self.tau_max),
            ("tau_step", self.tau_step),
            ("window_hwhm", self.window_hwhm),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(name, "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Short description of the numerics, stored with every trace.
    pub fn fingerprint(&self, tau_step: f64, tau_max: f64) -> String {
        let pc = &self.propagator;
        format!(
            "K={};offset={};tau_step={};tau_max={};tail_tol={};window={};rel_tol={};abs_tol={};step_max={};transient={};ss_tol={}",
            self.period_samples,
            self.sample_offset,
            tau_step,
            tau_max,
            self.tail_tol,
            self.window_hwhm.map_or("none".into(), |w| w.to_string()),
            pc.rel_tol,
            pc.abs_tol,
            pc.step_max.map_or("auto".into(), |h| h.to_string()),
            pc.t_transient_factor,
            pc.ss_tol,
        )
    }
}

/// Time-averaged fluctuation correlator on a uniform τ grid starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub tau: Vec<f64>,
    pub values: Vec<C64>,
}

impl CorrelationTrace {
    pub fn tau_step(&self) -> f64 {
        if self.tau.len() < 2 {
            0.0
        } else {
            self.tau[1] - self.tau[0]
        }
    }

    /// |C̄(τ_max)| / |C̄(0)|, zero for a vanishing correlator.
    pub fn tail_ratio(&self) -> f64 {
        let c0 = self.values.first().map_or(0.0, |c| c.norm());
        let tail = self.values.last().map_or(0.0, |c| c.norm());
        if c0 == 0.0 {
            if tail == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            tail / c0
        }
    }
}

/// Provenance of a computed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub drive: DriveParams,
    pub dissipation: DissipationParams,
    pub tau_step: f64,
    pub tau_max: f64,
    pub window_hwhm: Option<f64>,
    pub fingerprint: String,
}

/// Sampled spectrum over ω − ω₁ (μeV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub omega_rel: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: Option<TraceMeta>,
}

impl SpectrumTrace {
    /// Trace without provenance, e.g. for synthetic or measured data.
    pub fn from_samples(omega_rel: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega_rel.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} grid points but {} values",
                omega_rel.len(),
                values.len()
            )));
        }
        Ok(SpectrumTrace {
            omega_rel,
            values,
            meta: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid integral over the whole grid.
    pub fn area(&self) -> f64 {
        self.omega_rel
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }
}

/// Uniform frequency grid of `points` values from `min` to `max` (μeV).
pub fn uniform_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let step = (max - min) / (points - 1) as f64;
    (0..points).map(|i| min + step * i as f64).collect()
}

/// Uniform τ grid `0, h, 2h, …` covering at least `tau_max`.
pub fn tau_grid(tau_step: f64, tau_max: f64) -> Vec<f64> {
    let n = (tau_max / tau_step - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|j| j as f64 * tau_step).collect()
}

/// Fluctuation correlator C(t, τ) for every τ in `tau_grid`, given the state
/// ρ(t) on the steady cycle.
pub fn two_time_correlation(
    t: f64,
    rho_t: &DensityMatrix2,
    tau_grid: &[f64],
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &PropagatorConfig,
) -> Result<Vec<C64>> {
    cfg.validate()?;
    check_tau_grid(tau_grid)?;
    let lv = Liouvillian::new(p, d);
    let ctl = cfg.step_control(p, d);

    let rho = *rho_t.as_operator();
    let seeded = rho * Operator2::sigma_plus();
    let mean_plus = rho[(G, X)];
    let mut y0 = [C64::new(0.0, 0.0); 8];
    y0[..4].copy_from_slice(&rho.vec());
    y0[4..].copy_from_slice(&seeded.vec());

    let times: Vec<f64> = tau_grid.iter().map(|tau| t + tau).collect();
    let mut out = Vec::with_capacity(tau_grid.len());
    integrate(
        |s, y: &[C64; 8]| {
            let (a, b) = lv.apply_pair(
                s,
                &Operator2::from_vec(&y[..4]),
                &Operator2::from_vec(&y[4..]),
            );
            let mut dy = [C64::new(0.0, 0.0); 8];
            dy[..4].copy_from_slice(&a.vec());
            dy[4..].copy_from_slice(&b.vec());
            dy
        },
        t,
        y0,
        &times,
        &ctl,
        |_| Ok(()),
        |_, _, y| {
            let state = Operator2::from_vec(&y[..4]);
            let regressed = Operator2::from_vec(&y[4..]);
            // Tr[σ⁻ X] = X_xg
            out.push(regressed[(X, G)] - mean_plus * state[(X, G)]);
            Ok(())
        },
    )?;
    Ok(out)
}

fn check_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() || tau_grid[0] != 0.0 {
        return Err(Error::invalid("tau_grid", "must start at 0"));
    }
    if tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("tau_grid", "must be strictly increasing"));
    }
    Ok(())
}

/// C̄(τ): the fluctuation correlator averaged over K uniform samples of the
/// converged cycle. For Δ = 0 the stationary correlator is returned.
pub fn time_averaged_correlation(
    tau_grid: &[f64],
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &SpectrumConfig,
) -> Result<CorrelationTrace> {
    cfg.validate()?;
    check_tau_grid(tau_grid)?;
    d.require_decay()?;
    let pc = &cfg.propagator;

    if p.beat() == 0.0 {
        let rho = stationary_state(p, d)?;
        let values = two_time_correlation(0.0, &rho, tau_grid, p, d, pc)?;
        return Ok(CorrelationTrace {
            tau: tau_grid.to_vec(),
            values,
        });
    }

    let cycle = periodic_steady_state(p, d, pc, cfg.period_samples, cfg.sample_offset)?;
    let per_sample: Vec<Vec<C64>> = cycle
        .times
        .par_iter()
        .zip(cycle.states.par_iter())
        .map(|(&t, rho)| two_time_correlation(t, rho, tau_grid, p, d, pc))
        .collect::<Result<_>>()?;

    // fixed summation order keeps the result independent of thread count
    let k = per_sample.len() as f64;
    let mut values = vec![C64::new(0.0, 0.0); tau_grid.len()];
    for sample in &per_sample {
        for (acc, c) in values.iter_mut().zip(sample) {
            *acc += c;
        }
    }
    values.iter_mut().for_each(|v| *v /= k);
    Ok(CorrelationTrace {
        tau: tau_grid.to_vec(),
        values,
    })
}

/// Trapezoid transform `Re Σ w_j e^{iωτ_j/ħ} C̄(τ_j) W(τ_j)` at each ω.
pub fn spectrum_from_correlation(
    corr: &CorrelationTrace,
    omega_rel: &[f64],
    window_hwhm: Option<f64>,
) -> Vec<f64> {
    let n = corr.tau.len();
    let weighted: Vec<C64> = corr
        .tau
        .iter()
        .zip(&corr.values)
        .enumerate()
        .map(|(j, (&tau, &c))| {
            let h = if n < 2 {
                0.0
            } else if j == 0 {
                0.5 * (corr.tau[1] - corr.tau[0])
            } else if j == n - 1 {
                0.5 * (corr.tau[j] - corr.tau[j - 1])
            } else {
                0.5 * (corr.tau[j + 1] - corr.tau[j - 1])
            };
            let win = window_hwhm.map_or(1.0, |w| (-w * tau / HBAR).exp());
            c * (h * win)
        })
        .collect();
    omega_rel
        .par_iter()
        .map(|&w| {
            let rate = w / HBAR;
            corr.tau
                .iter()
                .zip(&weighted)
                .map(|(&tau, c)| {
                    let (s, co) = (rate * tau).sin_cos();
                    c.re * co - c.im * s
                })
                .sum()
        })
        .collect()
}

/// Largest τ step that resolves the frequency grid: πħ/(4·max|ω−ω₁|).
pub fn max_tau_step(omega_rel: &[f64]) -> f64 {
    let wmax = omega_rel
        .iter()
        .fold(0.0f64, |m, w| m.max(w.abs()))
        .max(1.0);
    PI * HBAR / (4.0 * wmax)
}

/// Default correlation window 12ħ/((γ+γ′)/2) in ps.
pub fn default_tau_max(d: &DissipationParams) -> f64 {
    12.0 * HBAR / (0.5 * (d.gamma + d.gamma_prime))
}

/// Incoherent resonance-fluorescence spectrum on the given ω − ω₁ grid.
pub fn incoherent_spectrum(
    omega_rel: &[f64],
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &SpectrumConfig,
) -> Result<SpectrumTrace> {
    p.validate()?;
    d.validate()?;
    d.require_decay()?;
    cfg.validate()?;
    if omega_rel.is_empty() || omega_rel.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("omega_rel", "grid must be non-empty and finite"));
    }

    let bound = max_tau_step(omega_rel);
    let tau_step = match cfg.tau_step {
        Some(h) if h > bound * (1.0 + 1e-12) => {
            return Err(Error::invalid(
                "tau_step",
                format!("{h} ps exceeds the resolution bound {bound} ps"),
            ))
        }
        Some(h) => h,
        None => bound,
    };

    let (mut tau_max, extensions) = match cfg.tau_max {
        Some(t) => (t, 0),
        None => (default_tau_max(d), TAU_MAX_EXTENSIONS),
    };
    let mut attempt = 0;
    let corr = loop {
        let grid = tau_grid(tau_step, tau_max);
        let corr = time_averaged_correlation(&grid, p, d, cfg)?;
        let ratio = corr.tail_ratio();
        if ratio < cfg.tail_tol || (ratio == 0.0) {
            break corr;
        }
        if attempt == extensions {
            return Err(Error::TailNotConverged {
                ratio,
                tau_max: *grid.last().unwrap(),
            });
        }
        attempt += 1;
        tau_max *= 2.0;
    };

    let values = spectrum_from_correlation(&corr, omega_rel, cfg.window_hwhm);
    let tau_max_used = *corr.tau.last().unwrap();
    Ok(SpectrumTrace {
        omega_rel: omega_rel.to_vec(),
        values,
        meta: Some(TraceMeta {
            drive: *p,
            dissipation: *d,
            tau_step,
            tau_max: tau_max_used,
            window_hwhm: cfg.window_hwhm,
            fingerprint: cfg.fingerprint(tau_step, tau_max_used),
        }),
    })
}
