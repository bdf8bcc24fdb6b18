//! Resonance fluorescence of a two-level emitter driven by two coherent
//! fields.
//!
//! The crate computes the incoherent emission spectrum from a time-dependent
//! Lindblad master equation (quantum regression plus time averaging over the
//! beat period) and the Floquet quasienergies whose differences label the
//! spectral lines. Energies are in μeV and times in ps throughout; see
//! [`units`].

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod export;
pub mod floquet;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod phonon;
pub mod run;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{DensityMatrix2, Operator2, Superoperator4, C64};
pub use params::{DissipationParams, DriveParams};
