//! Truncated Floquet matrix, quasienergies and the transition frequencies
//! they predict, plus closed-form results for the lowest harmonic order.
//!
//! The Floquet matrix is indexed by (harmonic n, level α) with harmonics
//! ordered N, N−1, …, −N and each 2×2 block in the (x, g) basis. Diagonal
//! blocks are the period-averaged Hamiltonian plus nΔ; the second drive
//! couples neighbouring harmonics only.

use serde::{Deserialize, Serialize};

use crate::eigen::eigh;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::params::DriveParams;

/// Largest supported harmonic order.
pub const MAX_ORDER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloquetConfig {
    pub order: usize,
}

impl FloquetConfig {
    pub fn new(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::invalid("order", format!("must be <= {MAX_ORDER}")));
        }
        Ok(FloquetConfig { order })
    }

    /// Matrix dimension M = 2(2N+1).
    pub fn dim(&self) -> usize {
        2 * (2 * self.order + 1)
    }

    /// Harmonic index of block `b`.
    pub fn harmonic(&self, block: usize) -> i64 {
        self.order as i64 - block as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetResult {
    pub config: FloquetConfig,
    /// Ascending quasienergies ε_λ (μeV).
    pub quasienergies: Vec<f64>,
    /// Fourier-coefficient eigenvectors, `eigenvectors[λ][2b + α]`.
    pub eigenvectors: Vec<Vec<C64>>,
    /// Deduplicated ε_λ − ε_λ′, sorted (μeV relative to ω₁).
    pub transitions: Vec<f64>,
}

pub fn build_floquet_matrix(p: &DriveParams, cfg: &FloquetConfig) -> Result<CMatrix> {
    p.validate()?;
    FloquetConfig::new(cfg.order)?;
    let blocks = 2 * cfg.order + 1;
    let beat = p.beat();
    let half_rabi = C64::new(0.5 * p.omega1, 0.0);
    let coupling = C64::from_polar(0.5 * p.omega2, p.phi);
    let mut h = CMatrix::zeros(cfg.dim());
    for b in 0..blocks {
        let n = cfg.harmonic(b) as f64;
        let (x, g) = (2 * b, 2 * b + 1);
        h[(x, x)] = C64::new(p.delta1 + n * beat, 0.0);
        h[(g, g)] = C64::new(n * beat, 0.0);
        h[(x, g)] = half_rabi;
        h[(g, x)] = half_rabi;
        if b + 1 < blocks {
            // ⟨g, n| H_F |x, n−1⟩ picks the e^{+iΔt} component of H_gx(t)
            let x_next = 2 * (b + 1);
            h[(g, x_next)] = coupling;
            h[(x_next, g)] = coupling.conj();
        }
    }
    Ok(h)
}

/// Full Floquet solution at harmonic order N.
pub fn solve(p: &DriveParams, cfg: &FloquetConfig) -> Result<FloquetResult> {
    let h = build_floquet_matrix(p, cfg)?;
    let eig = eigh(&h)?;
    let transitions = dedup_sorted(raw_transitions(&eig.values), dedup_tolerance(p));
    Ok(FloquetResult {
        config: *cfg,
        quasienergies: eig.values,
        eigenvectors: eig.vectors,
        transitions,
    })
}

pub fn quasienergies(p: &DriveParams, cfg: &FloquetConfig) -> Result<Vec<f64>> {
    Ok(eigh(&build_floquet_matrix(p, cfg)?)?.values)
}

/// All M² differences ε_λ − ε_λ′ in row-major (λ, λ′) order.
pub fn raw_transitions(quasienergies: &[f64]) -> Vec<f64> {
    quasienergies
        .iter()
        .flat_map(|a| quasienergies.iter().map(move |b| a - b))
        .collect()
}

/// Tolerance for merging transition frequencies: 1e-9·max(Ω₁, |Δ|, 1 μeV).
pub fn dedup_tolerance(p: &DriveParams) -> f64 {
    1e-9 * p.omega1.max(p.beat().abs()).max(1.0)
}

/// Sorts and merges values closer than `tol` to their cluster's first
/// member; each cluster is represented by its mean.
fn dedup_sorted(mut values: Vec<f64>, tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[start] > tol {
            let cluster = &values[start..i];
            out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            start = i;
        }
    }
    out
}

/// Deduplicated transition frequencies relative to ω₁ (μeV).
pub fn transition_frequencies(p: &DriveParams, cfg: &FloquetConfig) -> Result<Vec<f64>> {
    let e = quasienergies(p, cfg)?;
    Ok(dedup_sorted(raw_transitions(&e), dedup_tolerance(p)))
}

/// Transitions inside the span of `omega_grid`, for plot overlays.
pub fn floquet_overlay(
    p: &DriveParams,
    cfg: &FloquetConfig,
    omega_grid: &[f64],
) -> Result<Vec<f64>> {
    if omega_grid.is_empty() {
        return Ok(Vec::new());
    }
    let lo = omega_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = omega_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(transition_frequencies(p, cfg)?
        .into_iter()
        .filter(|&w| w >= lo && w <= hi)
        .collect())
}

/// Folds a quasienergy into the zone [−|Δ|/2, |Δ|/2).
pub fn fold_quasienergy(e: f64, beat: f64) -> f64 {
    let w = beat.abs();
    if w == 0.0 {
        return e;
    }
    (e + 0.5 * w).rem_euclid(w) - 0.5 * w
}

/// Distance between two quasienergies modulo |Δ|.
pub fn zone_distance(a: f64, b: f64, beat: f64) -> f64 {
    fold_quasienergy(a - b, beat).abs()
}

/// Detunings in units of Ω₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    /// Δ̃₁ = Δ₁/Ω₁.
    pub d1_t: f64,
    /// Δ̃ = Δ/Ω₁.
    pub d_t: f64,
}

impl ReducedParams {
    pub fn from_drive(p: &DriveParams) -> Result<Self> {
        if !(p.omega1 > 0.0) {
            return Err(Error::invalid("omega1", "reduced units need omega1 > 0"));
        }
        Ok(ReducedParams {
            d1_t: p.delta1 / p.omega1,
            d_t: p.beat() / p.omega1,
        })
    }

    /// Reduced frequency ω̃ = ω/Ω₁.
    pub fn reduce(p: &DriveParams, omega: f64) -> f64 {
        omega / p.omega1
    }
}

/// Residual of the N = 1 characteristic equation at ω̃.
///
/// Evaluates `g·[f·(1 − 4(Δ̃−ω̃)(Δ̃₁+Δ̃−ω̃)) + 4α²(β+ω̃)(Δ̃₁+Δ̃−ω̃)]` with
/// the bracket multiplied through by g so that β = α²(ω̃+Δ̃)/g never divides.
/// The cleared bracket alone is the degree-6 characteristic polynomial of the
/// N = 1 matrix; the leading g factor adds the two roots of g.
pub fn char_poly_residual(omega_t: f64, rp: &ReducedParams, alpha_c: f64) -> f64 {
    let (w, d1, d) = (omega_t, rp.d1_t, rp.d_t);
    let a2 = alpha_c * alpha_c;
    let shifted = w + d - 0.5 * d1;
    let g = (1.0 + d1 * d1) - 4.0 * shifted * shifted;
    // g·(β + ω̃) and g·f
    let g_beta_w = a2 * (w + d) + g * w;
    let g_f = g + 4.0 * g_beta_w * (d1 - w);
    let cleared =
        g_f * (1.0 - 4.0 * (d - w) * (d1 + d - w)) + 4.0 * a2 * g_beta_w * (d1 + d - w);
    g * cleared
}

/// η = 1 − Δ₁/√(Ω₁² + Δ₁²), the reduction of the second-drive splitting
/// for a detuned primary laser.
pub fn eta_factor(omega1: f64, delta1: f64) -> Result<f64> {
    if !(omega1 > 0.0) {
        return Err(Error::invalid("omega1", "must be > 0"));
    }
    Ok(1.0 - delta1 / omega1.hypot(delta1))
}

/// Second-order N = 1 levels (units of Ω₁) for Δ̃₁ = 0, Δ̃ = −1.
pub fn resonant_perturbative_levels(alpha_c: f64) -> [f64; 6] {
    let a = alpha_c;
    let shift = 3.0 / 64.0 * a * a;
    let outer = 1.5 + 3.0 / 32.0 * a * a;
    [
        0.5 + shift + 0.25 * a,
        0.5 + shift - 0.25 * a,
        -0.5 - shift + 0.25 * a,
        -0.5 - shift - 0.25 * a,
        outer,
        -outer,
    ]
}

/// First-order N = 1 levels (units of Ω₁) for a detuned primary laser with
/// Δ̃ = −√(1+Δ̃₁²): the middle pair of unperturbed levels splits by ±ηα/4.
pub fn detuned_perturbative_levels(d1_t: f64, alpha_c: f64) -> [f64; 6] {
    let r = (1.0 + d1_t * d1_t).sqrt();
    let eta = 1.0 - d1_t / r;
    let level = |m: f64| 0.5 * d1_t + 0.5 * (2.0 * m - 3.0) * r;
    let split = 0.25 * eta * alpha_c;
    [
        level(0.0),
        level(1.0) - split,
        level(1.0) + split,
        level(2.0) - split,
        level(2.0) + split,
        level(3.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(o1: f64, o2: f64, d1: f64, d2: f64) -> DriveParams {
        DriveParams::new(o1, o2, d1, d2).unwrap()
    }

    #[test]
    fn first_order_matrix_layout() {
        // Ω₁=30, Ω₂=10, Δ₁=4, Δ = Δ₁ − Δ₂ = −26
        let p = drive(30.0, 10.0, 4.0, 30.0);
        let h = build_floquet_matrix(&p, &FloquetConfig::new(1).unwrap()).unwrap();
        let (o1, o2, d1, d) = (30.0, 10.0, 4.0, -26.0);
        #[rustfmt::skip]
        let twice = [
            [2.0 * (d1 + d), o1, 0.0, 0.0, 0.0, 0.0],
            [o1, 2.0 * d, o2, 0.0, 0.0, 0.0],
            [0.0, o2, 2.0 * d1, o1, 0.0, 0.0],
            [0.0, 0.0, o1, 0.0, o2, 0.0],
            [0.0, 0.0, 0.0, o2, 2.0 * (d1 - d), o1],
            [0.0, 0.0, 0.0, 0.0, o1, -2.0 * d],
        ];
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h[(i, j)], C64::new(0.5 * twice[i][j], 0.0), "({i},{j})");
            }
        }
        assert!(h.is_hermitian());
    }

    #[test]
    fn phase_enters_coupling() {
        let p = drive(30.0, 10.0, 0.0, 30.0).with_phi(0.3);
        let h = build_floquet_matrix(&p, &FloquetConfig::new(2).unwrap()).unwrap();
        assert!(h.is_hermitian());
        assert!((h[(1, 2)] - C64::from_polar(5.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn decoupled_doublets() {
        let p = drive(30.0, 0.0, 7.0, 20.0);
        let cfg = FloquetConfig::new(2).unwrap();
        let e = quasienergies(&p, &cfg).unwrap();
        let r = 0.5 * (30.0f64 * 30.0 + 49.0).sqrt();
        let mut expected: Vec<f64> = (-2..=2)
            .flat_map(|n| {
                let c = 3.5 + n as f64 * p.beat();
                [c - r, c + r]
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn transitions_counts_and_symmetry() {
        let p = drive(30.0, 12.0, 0.0, 30.0);
        let cfg = FloquetConfig::new(1).unwrap();
        let e = quasienergies(&p, &cfg).unwrap();
        assert_eq!(raw_transitions(&e).len(), 36);
        let t = transition_frequencies(&p, &cfg).unwrap();
        for w in &t {
            assert!(t.iter().any(|v| (v + w).abs() < 1e-9), "{w} lacks a partner");
        }
        assert!(t.iter().any(|w| w.abs() < 1e-12));
    }

    #[test]
    fn resonant_unperturbed_transitions() {
        // α_c = 0: levels ±15 + 30n; direct enumeration of the differences
        let p = drive(30.0, 0.0, 0.0, 30.0);
        let t = transition_frequencies(&p, &FloquetConfig::new(1).unwrap()).unwrap();
        let mut levels = Vec::new();
        for n in -1..=1 {
            for s in [-15.0, 15.0] {
                levels.push(s - 30.0 * n as f64);
            }
        }
        let mut expected: Vec<f64> = levels
            .iter()
            .flat_map(|a| levels.iter().map(move |b| a - b))
            .collect();
        expected.sort_by(f64::total_cmp);
        expected.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(t.len(), expected.len());
        for (a, b) in t.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
        for w in [0.0, 30.0, -30.0, 60.0, -60.0] {
            assert!(t.iter().any(|v| (v - w).abs() < 1e-10));
        }
    }

    #[test]
    fn overlay_clips_to_grid() {
        let p = drive(30.0, 10.0, 0.0, 30.0);
        let cfg = FloquetConfig::new(3).unwrap();
        assert!(floquet_overlay(&p, &cfg, &[]).unwrap().is_empty());
        let o = floquet_overlay(&p, &cfg, &[-40.0, 0.0, 40.0]).unwrap();
        assert!(!o.is_empty());
        assert!(o.iter().all(|w| (-40.0..=40.0).contains(w)));
    }

    #[test]
    fn order_cap() {
        assert!(FloquetConfig::new(51).is_err());
        assert_eq!(FloquetConfig::new(50).unwrap().dim(), 202);
    }

    #[test]
    fn folding() {
        assert_eq!(fold_quasienergy(16.0, -30.0), -14.0);
        assert_eq!(fold_quasienergy(-15.0, 30.0), -15.0);
        assert_eq!(fold_quasienergy(15.0, 30.0), -15.0);
        assert!((zone_distance(29.0, -29.0, 30.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn char_poly_vanishes_on_g_roots() {
        let rp = ReducedParams {
            d1_t: 0.4,
            d_t: -1.3,
        };
        let r = (1.0f64 + 0.16).sqrt();
        for s in [-1.0, 1.0] {
            let w = 0.5 * rp.d1_t - rp.d_t + s * 0.5 * r;
            assert!(char_poly_residual(w, &rp, 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn char_poly_bare_mollow_roots() {
        let rp = ReducedParams { d1_t: 0.0, d_t: -1.0 };
        for w in [-0.5, 0.5] {
            assert!(char_poly_residual(w, &rp, 0.0).abs() < 1e-14);
        }
        assert!(char_poly_residual(0.1, &rp, 0.0).abs() > 1e-3);
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta_factor(30.0, 0.0).unwrap(), 1.0);
        let eta = eta_factor(31.6, 10.0).unwrap();
        assert!((eta - 0.698).abs() < 1e-3, "{eta}");
        assert!(eta_factor(1.0, 1e9).unwrap() < 1e-9);
        assert!(eta_factor(0.0, 1.0).is_err());
    }

    #[test]
    fn detuned_levels_reduce_to_resonant_spacing() {
        let l = detuned_perturbative_levels(0.0, 0.0);
        assert_eq!(l, [-1.5, -0.5, -0.5, 0.5, 0.5, 1.5]);
    }
}
