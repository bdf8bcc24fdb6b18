//! End-to-end pipelines behind the command-line tool: single spectra and
//! parameter sweeps with per-point failure isolation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SweepParameter};
use crate::error::{Error, Result};
use crate::floquet::{floquet_overlay, FloquetConfig};
use crate::params::DriveParams;
use crate::phonon::dephasing_rate;
use crate::spectrum::{incoherent_spectrum, SpectrumTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the configuration text.
    pub config_sha256: String,
    pub version: String,
    pub threads: usize,
    pub wall_time_s: f64,
}

impl Provenance {
    fn new(config_text: &str, threads: usize, started: Instant) -> Self {
        Provenance {
            config_sha256: config_hash(config_text),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRun {
    pub trace: SpectrumTrace,
    /// Floquet transitions inside the frequency window, if requested.
    pub overlay: Option<Vec<f64>>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub trace: Option<SpectrumTrace>,
    pub overlay: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub omega_rel: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.axis_value).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    pub axis_value: Option<f64>,
    pub transitions: Vec<f64>,
}

/// Runs `f` on a pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(f))
}

fn overlay_for(p: &DriveParams, order: Option<FloquetConfig>, grid: &[f64]) -> Result<Option<Vec<f64>>> {
    match order {
        Some(fc) if p.beat() != 0.0 => Ok(Some(floquet_overlay(p, &fc, grid)?)),
        _ => Ok(None),
    }
}

/// Single spectrum (and optional overlay) for a configuration without a
/// sweep axis.
pub fn run_spectrum(cfg: &RunConfig, config_text: &str, threads: usize) -> Result<SpectrumRun> {
    if cfg.sweep.is_some() {
        return Err(Error::invalid("sweep", "use run_sweep for configurations with a sweep axis"));
    }
    let started = Instant::now();
    let grid = cfg.grid.values();
    let (trace, overlay) = with_threads(threads, || -> Result<_> {
        let trace = incoherent_spectrum(&grid, &cfg.drive, &cfg.dissipation, &cfg.spectrum)?;
        let overlay = overlay_for(&cfg.drive, cfg.floquet, &grid)?;
        Ok((trace, overlay))
    })??;
    Ok(SpectrumRun {
        trace,
        overlay,
        provenance: Provenance::new(config_text, threads, started),
    })
}

/// One spectrum per axis value. Failing points are recorded and the sweep
/// continues; results are assembled in axis order.
pub fn run_sweep(cfg: &RunConfig, config_text: &str, threads: usize) -> Result<SweepResult> {
    let axis = cfg
        .sweep
        .ok_or_else(|| Error::invalid("sweep", "configuration has no sweep axis"))?;
    let started = Instant::now();
    let grid = cfg.grid.values();
    let values = axis.values();
    let points = with_threads(threads, || {
        values
            .par_iter()
            .map(|&v| {
                let p = axis.parameter.apply(&cfg.drive, v);
                let outcome = p.validate().and_then(|_| {
                    let trace = incoherent_spectrum(&grid, &p, &cfg.dissipation, &cfg.spectrum)?;
                    Ok((trace, overlay_for(&p, cfg.floquet, &grid)?))
                });
                match outcome {
                    Ok((trace, overlay)) => SweepPoint {
                        axis_value: v,
                        trace: Some(trace),
                        overlay,
                        error: None,
                    },
                    Err(e) => SweepPoint {
                        axis_value: v,
                        trace: None,
                        overlay: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(SweepResult {
        parameter: axis.parameter,
        omega_rel: grid,
        points,
        provenance: Provenance::new(config_text, threads, started),
    })
}

/// Floquet transitions for the configured drive, or for every sweep point.
pub fn run_floquet(cfg: &RunConfig, order: FloquetConfig) -> Result<Vec<TransitionSet>> {
    let grid = cfg.grid.values();
    match cfg.sweep {
        None => Ok(vec![TransitionSet {
            axis_value: None,
            transitions: floquet_overlay(&cfg.drive, &order, &grid)?,
        }]),
        Some(axis) => axis
            .values()
            .into_iter()
            .map(|v| {
                let p = axis.parameter.apply(&cfg.drive, v);
                Ok(TransitionSet {
                    axis_value: Some(v),
                    transitions: floquet_overlay(&p, &order, &grid)?,
                })
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononEstimate {
    #[serde(rename = "omega_rabi_ueV")]
    pub omega_rabi: f64,
    #[serde(rename = "gamma_prime_ph_ueV")]
    pub gamma_prime_ph: f64,
}

/// Phonon dephasing floor at the configured (or conservative) Rabi energy.
pub fn run_phonon_rate(cfg: &RunConfig) -> Result<PhononEstimate> {
    cfg.phonon.validate()?;
    let omega = cfg
        .phonon_omega_rabi
        .unwrap_or(cfg.drive.omega1.max(cfg.drive.omega2));
    Ok(PhononEstimate {
        omega_rabi: omega,
        gamma_prime_ph: dephasing_rate(&cfg.phonon, omega),
    })
}
