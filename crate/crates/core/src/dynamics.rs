//! Time-dependent Hamiltonian, Lindblad generator and density-matrix
//! propagation, including detection of the periodic steady state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank4, solve4, DensityMatrix2, Operator2, Superoperator4, C64, G, X};
use crate::ode::{integrate, StepControl};
use crate::params::{DissipationParams, DriveParams};
use crate::units::HBAR;

/// Numerical settings of the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    /// Requested step cap in ps. The effective cap is additionally limited to
    /// T/200 and 0.01·ħ/(largest energy scale); `None` uses those limits.
    pub step_max: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Burn-in before steady-state iteration, in units of ħ/γ.
    pub t_transient_factor: f64,
    /// Max-element tolerance for period-to-period convergence.
    pub ss_tol: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            step_max: None,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_transient_factor: 20.0,
            ss_tol: 1e-10,
        }
    }
}

/// Smallest step the controller may take (ps).
pub const STEP_MIN: f64 = 1e-8;
/// Largest re-Hermitization / renormalization correction accepted per step.
pub const MAX_PROJECTION_CORRECTION: f64 = 1e-8;
/// Eigenvalues below this are reported as a positivity violation.
pub const POSITIVITY_FLOOR: f64 = -1e-6;
/// Give up on periodic convergence after this many periods.
pub const MAX_PERIODS: usize = 10_000;

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.step_max {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid("step_max", "must be positive"));
            }
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("rel_tol", "tolerances must be positive"));
        }
        if !(self.t_transient_factor >= 0.0) {
            return Err(Error::invalid("t_transient_factor", "must be >= 0"));
        }
        if !(self.ss_tol > 0.0) {
            return Err(Error::invalid("ss_tol", "must be positive"));
        }
        Ok(())
    }

    /// Step cap actually used for the given parameters (ps).
    pub fn effective_step_max(&self, p: &DriveParams, d: &DissipationParams) -> f64 {
        let scale = p
            .max_energy_scale()
            .max(d.gamma)
            .max(d.gamma_prime);
        let mut cap = if scale > 0.0 { 0.01 * HBAR / scale } else { 1.0 };
        if let Ok(period) = p.period() {
            cap = cap.min(period / 200.0);
        }
        match self.step_max {
            Some(h) => h.min(cap),
            None => cap,
        }
    }

    pub(crate) fn step_control(&self, p: &DriveParams, d: &DissipationParams) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            step_max: self.effective_step_max(p, d),
            step_min: STEP_MIN,
        }
    }
}

/// H(t) in μeV, frame rotating at ω₁.
pub fn hamiltonian_at(t: f64, p: &DriveParams) -> Operator2 {
    let phase = p.beat() * t / HBAR + p.phi;
    let drive = 0.5 * (C64::new(p.omega1, 0.0) + p.omega2 * C64::new(0.0, -phase).exp());
    let mut h = Operator2::zero();
    h[(X, X)] = C64::new(p.delta1, 0.0);
    h[(X, G)] = drive;
    h[(G, X)] = drive.conj();
    h
}

/// Lindblad generator for a fixed parameter set. Rates are stored in rad/ps.
#[derive(Debug, Clone, Copy)]
pub struct Liouvillian {
    drive: DriveParams,
    decay: f64,
    dephasing: f64,
}

impl Liouvillian {
    pub fn new(p: &DriveParams, d: &DissipationParams) -> Self {
        Liouvillian {
            drive: *p,
            decay: d.gamma / HBAR,
            dephasing: d.gamma_prime / HBAR,
        }
    }

    /// dX/dt for an arbitrary (not necessarily Hermitian) 2×2 operator X.
    #[inline]
    pub fn apply(&self, t: f64, x: &Operator2) -> Operator2 {
        let h = hamiltonian_at(t, &self.drive).scale(C64::new(1.0 / HBAR, 0.0));
        self.apply_with(&h, x)
    }

    /// Same as [`Liouvillian::apply`] for two operators sharing one time.
    #[inline]
    pub fn apply_pair(&self, t: f64, a: &Operator2, b: &Operator2) -> (Operator2, Operator2) {
        let h = hamiltonian_at(t, &self.drive).scale(C64::new(1.0 / HBAR, 0.0));
        (self.apply_with(&h, a), self.apply_with(&h, b))
    }

    #[inline]
    fn apply_with(&self, h: &Operator2, x: &Operator2) -> Operator2 {
        let mut out = h.commutator(x).scale(C64::new(0.0, -1.0));
        let (xx, xg, gx) = (x[(X, X)], x[(X, G)], x[(G, X)]);
        let coh = -0.5 * (self.decay + self.dephasing);
        out[(X, X)] -= xx * self.decay;
        out[(G, G)] += xx * self.decay;
        out[(X, G)] += xg * coh;
        out[(G, X)] += gx * coh;
        out
    }

    #[inline]
    pub(crate) fn apply_vec(&self, t: f64, v: &[C64]) -> [C64; 4] {
        self.apply(t, &Operator2::from_vec(v)).vec()
    }

    /// Matrix form of the generator at time t (rad/ps).
    pub fn superoperator(&self, t: f64) -> Superoperator4 {
        let h = hamiltonian_at(t, &self.drive).scale(C64::new(1.0 / HBAR, 0.0));
        let mi = C64::new(0.0, -1.0);
        let coherent = (Superoperator4::left(&h) - Superoperator4::right(&h)).scale(mi);
        let sm = Operator2::sigma_minus();
        let sp = Operator2::sigma_plus();
        let n = Operator2::excited_projector();
        coherent
            + dissipator(&sm, &sp, 0.5 * self.decay)
            + dissipator(&n, &n, 0.5 * self.dephasing)
    }
}

/// rate · L[A] with L[A]ρ = 2AρA† − A†Aρ − ρA†A.
fn dissipator(a: &Operator2, a_dag: &Operator2, rate: f64) -> Superoperator4 {
    let ada = *a_dag * *a;
    let two = C64::new(2.0, 0.0);
    (Superoperator4::sandwich(a, a_dag).scale(two)
        - Superoperator4::left(&ada)
        - Superoperator4::right(&ada))
    .scale(C64::new(rate, 0.0))
}

/// Generator of the master equation at time t.
pub fn liouvillian_at(t: f64, p: &DriveParams, d: &DissipationParams) -> Superoperator4 {
    Liouvillian::new(p, d).superoperator(t)
}

fn project_step(y: &mut [C64; 4]) -> Result<()> {
    let op = Operator2::from_vec(y);
    let (rho, correction) = DensityMatrix2::project(&op);
    if !(correction <= MAX_PROJECTION_CORRECTION) {
        return Err(Error::StateInvalid(format!(
            "trace/Hermiticity correction {correction:e} exceeds {MAX_PROJECTION_CORRECTION:e}"
        )));
    }
    let lmin = rho.min_eigenvalue();
    if lmin < POSITIVITY_FLOOR {
        return Err(Error::StateInvalid(format!("negative eigenvalue {lmin:e}")));
    }
    *y = rho.as_operator().vec();
    Ok(())
}

/// Propagates ρ from `t0` and returns the state at each of `times`
/// (ascending, all ≥ `t0`).
pub fn propagate_sampled(
    rho0: &DensityMatrix2,
    t0: f64,
    times: &[f64],
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &PropagatorConfig,
) -> Result<Vec<DensityMatrix2>> {
    rho0.check()?;
    cfg.validate()?;
    let lv = Liouvillian::new(p, d);
    let ctl = cfg.step_control(p, d);
    let mut out = Vec::with_capacity(times.len());
    integrate(
        |t, y: &[C64; 4]| lv.apply_vec(t, y),
        t0,
        rho0.as_operator().vec(),
        times,
        &ctl,
        project_step,
        |_, _, y| {
            out.push(DensityMatrix2::new_unchecked(Operator2::from_vec(y)));
            Ok(())
        },
    )?;
    Ok(out)
}

/// ρ(t1) from ρ(t0) under the master equation.
pub fn propagate(
    rho0: &DensityMatrix2,
    t0: f64,
    t1: f64,
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &PropagatorConfig,
) -> Result<DensityMatrix2> {
    if t1 < t0 {
        return Err(Error::invalid("t1", "must be >= t0"));
    }
    Ok(propagate_sampled(rho0, t0, &[t1], p, d, cfg)?[0])
}

/// Converged cycle of a periodically driven system, sampled uniformly over
/// one period.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyCycle {
    pub period: f64,
    /// Absolute sample times (ps), `times[k] = t_start + offset + k·T/K`.
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    /// Number of whole periods propagated before sampling.
    pub periods_run: usize,
}

/// Propagates from |g⟩⟨g| through the burn-in, iterates whole periods until
/// successive cycles agree to `ss_tol`, then samples `samples` states evenly
/// over one period starting `offset` ps into the cycle.
pub fn periodic_steady_state(
    p: &DriveParams,
    d: &DissipationParams,
    cfg: &PropagatorConfig,
    samples: usize,
    offset: f64,
) -> Result<SteadyCycle> {
    d.require_decay()?;
    let period = p.period()?;
    if samples == 0 {
        return Err(Error::invalid("period_samples", "must be >= 1"));
    }
    if !(offset.is_finite() && offset >= 0.0) {
        return Err(Error::invalid("sample_offset", "must be finite and >= 0"));
    }

    let burn_periods = ((cfg.t_transient_factor * HBAR / d.gamma) / period)
        .ceil()
        .max(1.0) as usize;
    let mut t = burn_periods as f64 * period;
    let mut rho = propagate(&DensityMatrix2::ground(), 0.0, t, p, d, cfg)?;
    let mut periods_run = burn_periods;

    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_PERIODS {
        let t_next = (periods_run + 1) as f64 * period;
        let next = propagate(&rho, t, t_next, p, d, cfg)?;
        residual = (*next.as_operator() - *rho.as_operator()).max_abs();
        rho = next;
        t = t_next;
        periods_run += 1;
        if residual < cfg.ss_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            periods: MAX_PERIODS,
            residual,
        });
    }

    let times: Vec<f64> = (0..samples)
        .map(|k| t + offset + k as f64 * period / samples as f64)
        .collect();
    let states = propagate_sampled(&rho, t, &times, p, d, cfg)?;
    Ok(SteadyCycle {
        period,
        times,
        states,
        periods_run,
    })
}

/// Trace-one null vector of a time-independent generator.
pub fn steady_state_of(l: &Superoperator4) -> Result<DensityMatrix2> {
    let rank = rank4(&l.0, 1e-12);
    if rank < 3 {
        return Err(Error::NonUniqueSteadyState { dim: 4 - rank });
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut a = l.0;
    // rows 0 and 3 of a trace-preserving generator are linearly dependent
    a[0] = [one, zero, zero, one];
    let b = [one, zero, zero, zero];
    let v = solve4(&a, &b).ok_or(Error::NonUniqueSteadyState { dim: 1 })?;
    let (rho, _) = DensityMatrix2::project(&Operator2::from_vec(&v));
    rho.check()?;
    Ok(rho)
}

/// Steady state when both drives share one frequency (Δ = 0), where the
/// generator is time independent.
pub fn stationary_state(p: &DriveParams, d: &DissipationParams) -> Result<DensityMatrix2> {
    if p.beat() != 0.0 {
        return Err(Error::invalid(
            "delta2",
            "stationary_state requires equal detunings (use periodic_steady_state)",
        ));
    }
    steady_state_of(&liouvillian_at(0.0, p, d))
}
