//! Dormand–Prince 5(4) integrator for small complex linear systems.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Step-size control of the embedded pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard upper bound on any step (ps).
    pub step_max: f64,
    /// Steps below this trigger [`Error::StepSizeUnderflow`] (ps).
    pub step_min: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn combine<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o += acc * h;
    }
    out
}

/// One trial step. Returns the fifth-order solution and the scaled error norm.
fn trial_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[C64; N],
    h: f64,
    ctl: &StepControl,
) -> ([C64; N], f64)
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
    let k3 = rhs(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(
        t + C4 * h,
        &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = rhs(
        t + C5 * h,
        &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &combine(
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y5 = combine(
        y,
        h,
        &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = rhs(t + h, &y5);

    let mut sum = 0.0;
    for i in 0..N {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let sc = ctl.abs_tol + ctl.rel_tol * y[i].norm().max(y5[i].norm());
        sum += (e.norm() / sc).powi(2);
    }
    (y5, (sum / N as f64).sqrt())
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` through every time in
/// `out_times` (ascending, all ≥ `t0`), calling `on_output(index, t, y)` at
/// each. Steps land exactly on output times. `post_step` may adjust the state
/// after each accepted step. Returns the state at the last output time.
pub fn integrate<const N: usize, F, P, O>(
    mut rhs: F,
    t0: f64,
    y0: [C64; N],
    out_times: &[f64],
    ctl: &StepControl,
    mut post_step: P,
    mut on_output: O,
) -> Result<[C64; N]>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
    P: FnMut(&mut [C64; N]) -> Result<()>,
    O: FnMut(usize, f64, &[C64; N]) -> Result<()>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = ctl.step_max;

    for (idx, &target) in out_times.iter().enumerate() {
        if target < t {
            return Err(Error::invalid("out_times", "must be ascending and >= t0"));
        }
        loop {
            let remaining = target - t;
            if remaining <= 1e-12 * target.abs().max(1.0) {
                t = target;
                break;
            }
            let step = h.min(remaining).min(ctl.step_max);
            let (y_new, err) = trial_step(&mut rhs, t, &y, step, ctl);
            if err <= 1.0 && err.is_finite() {
                let lands = step == remaining;
                t = if lands { target } else { t + step };
                y = y_new;
                post_step(&mut y)?;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a step shortened to hit an output time must not shrink the
                // natural step size
                h = if lands { h.max(step * factor) } else { step * factor };
                h = h.min(ctl.step_max);
                if lands {
                    break;
                }
            } else {
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = step * factor;
                if h < ctl.step_min {
                    return Err(Error::StepSizeUnderflow { t, step: h });
                }
            }
        }
        on_output(idx, t, &y)?;
    }
    Ok(y)
}
