//! Peak extraction, windowed spectral weights, mirror comparison and
//! instrument broadening on sampled spectra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SpectrumTrace;

/// Default prominence threshold as a fraction of the trace maximum.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Vertex of the three-point parabola (μeV).
    pub center: f64,
    pub height: f64,
    /// Full width at half prominence, linearly interpolated (μeV).
    pub fwhm: f64,
    /// Trapezoid area between the flanking valleys.
    pub weight: f64,
    pub prominence: f64,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if !(a < 0.0) {
        return (x[1], y[1]);
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[1] + (xv - x[1]) * (d1 + a * (xv - x[0]));
    (xv, yv.max(y[1]))
}

/// Indices of strict local maxima; flat tops report their middle sample.
fn local_maxima(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i - 1] < v[i] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Lowest value between `i` and the nearest strictly higher sample (or edge)
/// on one side.
fn side_minimum(v: &[f64], i: usize, step: isize) -> f64 {
    let mut k = i as isize;
    let mut lo = v[i];
    loop {
        k += step;
        if k < 0 || k as usize >= v.len() || v[k as usize] > v[i] {
            return lo;
        }
        lo = lo.min(v[k as usize]);
    }
}

/// Index of the valley reached by walking downhill from `i`.
fn valley(v: &[f64], i: usize, step: isize) -> usize {
    let mut k = i as isize;
    loop {
        let next = k + step;
        if next < 0 || next as usize >= v.len() || v[next as usize] > v[k as usize] {
            return k as usize;
        }
        k = next;
    }
}

/// Position where the trace first drops to `level` walking from `i`.
fn crossing(x: &[f64], v: &[f64], i: usize, level: f64, step: isize) -> f64 {
    let mut k = i as isize;
    loop {
        let next = k + step;
        if next < 0 || next as usize >= v.len() {
            return x[k as usize];
        }
        let (a, b) = (k as usize, next as usize);
        if v[b] <= level {
            let frac = (v[a] - level) / (v[a] - v[b]);
            return x[a] + frac * (x[b] - x[a]);
        }
        k = next;
    }
}

fn trapezoid(x: &[f64], v: &[f64]) -> f64 {
    x.windows(2)
        .zip(v.windows(2))
        .map(|(w, y)| 0.5 * (w[1] - w[0]) * (y[0] + y[1]))
        .sum()
}

/// Local maxima whose prominence is at least `min_prominence` times the
/// trace maximum, in ascending frequency order.
pub fn find_peaks(trace: &SpectrumTrace, min_prominence: f64) -> Vec<Peak> {
    let (x, v) = (&trace.omega_rel, &trace.values);
    if v.len() < 3 {
        return Vec::new();
    }
    let vmax = trace.max_value();
    if !(vmax > 0.0) {
        return Vec::new();
    }
    let threshold = min_prominence * vmax;
    local_maxima(v)
        .into_iter()
        .filter_map(|i| {
            let base = side_minimum(v, i, -1).max(side_minimum(v, i, 1));
            let prominence = v[i] - base;
            if prominence < threshold || prominence <= 0.0 {
                return None;
            }
            let (center, height) =
                parabola_vertex([x[i - 1], x[i], x[i + 1]], [v[i - 1], v[i], v[i + 1]]);
            let level = v[i] - 0.5 * prominence;
            let fwhm = crossing(x, v, i, level, 1) - crossing(x, v, i, level, -1);
            let (lo, hi) = (valley(v, i, -1), valley(v, i, 1));
            let weight = trapezoid(&x[lo..=hi], &v[lo..=hi]);
            Some(Peak {
                center,
                height,
                fwhm,
                weight,
                prominence,
            })
        })
        .collect()
}

/// Linear interpolation of the trace at `w`; `w` must lie on the grid span.
fn interpolate(x: &[f64], v: &[f64], w: f64) -> f64 {
    let k = x.partition_point(|&xi| xi <= w).clamp(1, x.len() - 1);
    let (x0, x1) = (x[k - 1], x[k]);
    let t = (w - x0) / (x1 - x0);
    v[k - 1] + t * (v[k] - v[k - 1])
}

/// Trapezoid integral over [center − half_window, center + half_window],
/// with linearly interpolated end points.
pub fn peak_weight(trace: &SpectrumTrace, center: f64, half_window: f64) -> Result<f64> {
    let (x, v) = (&trace.omega_rel, &trace.values);
    let (lo, hi) = (center - half_window, center + half_window);
    if x.len() < 2 || !(half_window >= 0.0) {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let tol = 1e-9 * (x[x.len() - 1] - x[0]).abs();
    if lo < x[0] - tol || hi > x[x.len() - 1] + tol {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let (lo, hi) = (lo.max(x[0]), hi.min(x[x.len() - 1]));
    let mut xs = vec![lo];
    let mut vs = vec![interpolate(x, v, lo)];
    for (&xi, &vi) in x.iter().zip(v) {
        if xi > lo && xi < hi {
            xs.push(xi);
            vs.push(vi);
        }
    }
    xs.push(hi);
    vs.push(interpolate(x, v, hi));
    Ok(trapezoid(&xs, &vs))
}

/// max|A(ω) − B(−ω)| / max A, where B is sampled on the negated grid of A
/// (stored in either order).
pub fn mirror_residual(a: &SpectrumTrace, b: &SpectrumTrace) -> Result<f64> {
    let n = a.len();
    if n == 0 || b.len() != n || a.omega_rel.len() != n || b.omega_rel.len() != n {
        return Err(Error::GridMismatch(format!(
            "traces have {} and {} points",
            a.len(),
            b.len()
        )));
    }
    let scale = a.omega_rel.iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-9 * scale;
    let negated = |pair: &dyn Fn(usize) -> usize| {
        (0..n).all(|i| (a.omega_rel[i] + b.omega_rel[pair(i)]).abs() <= tol)
    };
    let pair: Box<dyn Fn(usize) -> usize> = if negated(&|i| n - 1 - i) {
        Box::new(move |i| n - 1 - i)
    } else if negated(&|i| i) {
        Box::new(|i| i)
    } else {
        return Err(Error::GridMismatch(
            "second trace is not sampled on the negated grid".into(),
        ));
    };
    let diff = (0..n)
        .map(|i| (a.values[i] - b.values[pair(i)]).abs())
        .fold(0.0, f64::max);
    let norm = a.max_value();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

/// Convolution with a unit-area Lorentzian of the given FWHM (μeV). Each
/// input sample's kernel is truncated at the grid edges and renormalized so
/// the trapezoid area of the trace is conserved.
pub fn convolve_lorentzian(trace: &SpectrumTrace, fwhm: f64) -> Result<SpectrumTrace> {
    if !(fwhm > 0.0 && fwhm.is_finite()) {
        return Err(Error::invalid("fwhm", "must be positive"));
    }
    let x = &trace.omega_rel;
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("trace", "needs at least two samples"));
    }
    let step = (x[n - 1] - x[0]) / (n - 1) as f64;
    if x
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step.abs())
    {
        return Err(Error::GridMismatch("convolution needs a uniform grid".into()));
    }
    if step >= fwhm / 4.0 {
        return Err(Error::GridTooCoarse {
            step,
            limit: fwhm / 4.0,
        });
    }
    let half = 0.5 * fwhm;
    let profile: Vec<f64> = (0..n)
        .map(|k| {
            let dx = k as f64 * step;
            half / (dx * dx + half * half)
        })
        .collect();
    // cumulative kernel sums give each column's truncated mass in O(1)
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + profile[k];
    }
    // trapezoid weights, so that the conserved quantity is the reported area
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 * step } else { step };
    let mass: Vec<f64> = (0..n)
        .map(|j| {
            let interior = prefix[j + 1] + prefix[n - j] - profile[0];
            step * interior - 0.5 * step * (profile[j] + profile[n - 1 - j])
        })
        .collect();
    let source: Vec<f64> = (0..n).map(|j| trace.values[j] * weight(j) / mass[j]).collect();
    let values = (0..n)
        .map(|i| (0..n).map(|j| source[j] * profile[i.abs_diff(j)]).sum())
        .collect();
    SpectrumTrace::from_samples(x.clone(), values)
}
