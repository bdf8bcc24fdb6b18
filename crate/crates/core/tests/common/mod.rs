//! Reference computations written independently of the library: a
//! hand-expanded master equation with fixed-step RK4, the one-period
//! Schrödinger propagator, an exact resolvent for time-independent spectra,
//! and a brute-force assignment between level sets.

#![allow(dead_code)]

use bichromatic::units::HBAR;
use bichromatic::{DissipationParams, DriveParams, C64};

pub type M2 = [[C64; 2]; 2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn add(a: &M2, b: &M2, s: C64) -> M2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += s * b[i][j];
        }
    }
    out
}

/// H(t) with index 0 = excited, 1 = ground.
pub fn hamiltonian(t: f64, p: &DriveParams) -> M2 {
    let beat = p.delta1 - p.delta2;
    let rabi = c(p.omega1) + C64::from_polar(p.omega2, -(beat * t / HBAR + p.phi));
    [[c(p.delta1), rabi * 0.5], [rabi.conj() * 0.5, ZERO]]
}

/// Master-equation generator applied to an arbitrary 2×2 operator, with
/// every term expanded by hand.
pub fn generator(t: f64, x: &M2, p: &DriveParams, d: &DissipationParams) -> M2 {
    let h = hamiltonian(t, p);
    let hx = mul(&h, x);
    let xh = mul(x, &h);
    let mi = C64::new(0.0, -1.0 / HBAR);
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = mi * (hx[i][j] - xh[i][j]);
        }
    }
    let g = d.gamma / HBAR;
    let gp = d.gamma_prime / HBAR;
    // (γ/2)(2σ⁻Xσ⁺ − nX − Xn) + (γ′/2)(2nXn − nX − Xn)
    out[0][0] += x[0][0] * (-g);
    out[1][1] += x[0][0] * g;
    out[0][1] += x[0][1] * (-0.5 * (g + gp));
    out[1][0] += x[1][0] * (-0.5 * (g + gp));
    out
}

/// Classic RK4 with a fixed number of steps.
pub fn rk4(
    x0: &M2,
    t0: f64,
    t1: f64,
    steps: usize,
    f: impl Fn(f64, &M2) -> M2,
) -> M2 {
    let h = (t1 - t0) / steps as f64;
    let mut x = *x0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &x);
        let k2 = f(t + 0.5 * h, &add(&x, &k1, c(0.5 * h)));
        let k3 = f(t + 0.5 * h, &add(&x, &k2, c(0.5 * h)));
        let k4 = f(t + h, &add(&x, &k3, c(h)));
        for i in 0..2 {
            for j in 0..2 {
                x[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (h / 6.0);
            }
        }
    }
    x
}

pub fn ground() -> M2 {
    [[ZERO, ZERO], [ZERO, c(1.0)]]
}

pub fn density_rk4(
    rho0: &M2,
    t0: f64,
    t1: f64,
    steps: usize,
    p: &DriveParams,
    d: &DissipationParams,
) -> M2 {
    rk4(rho0, t0, t1, steps, |t, x| generator(t, x, p, d))
}

/// Eigenvalues of a general complex 2×2 matrix.
fn eig2(u: &M2) -> [C64; 2] {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr * 0.25 - det).sqrt();
    [tr * 0.5 + disc, tr * 0.5 - disc]
}

/// Quasienergies −ħ·arg(λ)/T from the one-period propagator, folded into
/// [−|Δ|/2, |Δ|/2).
pub fn monodromy_quasienergies(p: &DriveParams, steps: usize) -> [f64; 2] {
    let beat = p.delta1 - p.delta2;
    let period = 2.0 * std::f64::consts::PI * HBAR / beat.abs();
    let identity = [[c(1.0), ZERO], [ZERO, c(1.0)]];
    let mi = C64::new(0.0, -1.0 / HBAR);
    let u = rk4(&identity, 0.0, period, steps, |t, x| {
        let hx = mul(&hamiltonian(t, p), x);
        [[mi * hx[0][0], mi * hx[0][1]], [mi * hx[1][0], mi * hx[1][1]]]
    });
    eig2(&u).map(|l| fold(-HBAR * l.arg() / period, beat))
}

pub fn fold(e: f64, beat: f64) -> f64 {
    let w = beat.abs();
    (e + 0.5 * w).rem_euclid(w) - 0.5 * w
}

pub fn zone_distance(a: f64, b: f64, beat: f64) -> f64 {
    fold(a - b, beat).abs()
}

/// Minimum-total-cost one-to-one assignment of every target to a distinct
/// candidate (exhaustive dynamic programme over target subsets). Returns the
/// largest single distance of the optimal assignment.
pub fn assignment_max_distance(
    targets: &[f64],
    candidates: &[f64],
    dist: impl Fn(f64, f64) -> f64,
) -> f64 {
    let n = targets.len();
    assert!(n <= 16 && candidates.len() >= n);
    let full = 1usize << n;
    // (total, worst) for each set of already-matched targets
    let mut best = vec![(f64::INFINITY, f64::INFINITY); full];
    best[0] = (0.0, 0.0);
    for &cand in candidates {
        let prev = best.clone();
        for mask in 0..full {
            let (total, worst) = prev[mask];
            if !total.is_finite() {
                continue;
            }
            for t in 0..n {
                if mask & (1 << t) == 0 {
                    let dd = dist(targets[t], cand);
                    let next = mask | (1 << t);
                    let cand_cost = (total + dd, worst.max(dd));
                    if cand_cost.0 < best[next].0 {
                        best[next] = cand_cost;
                    }
                }
            }
        }
    }
    best[full - 1].1
}

/// Dense complex Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![ZERO; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Row-major flattening [xx, xg, gx, gg].
fn flat(x: &M2) -> [C64; 4] {
    [x[0][0], x[0][1], x[1][0], x[1][1]]
}

fn unflat(v: &[C64]) -> M2 {
    [[v[0], v[1]], [v[2], v[3]]]
}

/// Matrix of the generator at time 0 (time independent when Δ = 0 or
/// Ω₂ = 0 with the frame at ω₁), built column by column.
pub fn generator_matrix(p: &DriveParams, d: &DissipationParams) -> Vec<Vec<C64>> {
    let mut m = vec![vec![ZERO; 4]; 4];
    for k in 0..4 {
        let mut e = [ZERO; 4];
        e[k] = c(1.0);
        let col = flat(&generator(0.0, &unflat(&e), p, d));
        for i in 0..4 {
            m[i][k] = col[i];
        }
    }
    m
}

pub fn stationary_state(p: &DriveParams, d: &DissipationParams) -> M2 {
    let mut a = generator_matrix(p, d);
    a[0] = vec![c(1.0), ZERO, ZERO, c(1.0)];
    unflat(&solve(a, vec![c(1.0), ZERO, ZERO, ZERO]))
}

/// Exact S(ω) = Re ∫₀^∞ e^{iωτ/ħ} C(τ) dτ for a time-independent generator,
/// from the resolvent −(L + iω/ħ)⁻¹ applied to ρσ⁺ − ⟨σ⁺⟩ρ.
pub fn stationary_spectrum(p: &DriveParams, d: &DissipationParams, omegas: &[f64]) -> Vec<f64> {
    let rho = stationary_state(p, d);
    let sigma_plus = [[ZERO, c(1.0)], [ZERO, ZERO]];
    let seeded = mul(&rho, &sigma_plus);
    let mean_plus = rho[1][0];
    let mut y = flat(&seeded);
    let r = flat(&rho);
    for k in 0..4 {
        y[k] -= mean_plus * r[k];
    }
    let l = generator_matrix(p, d);
    omegas
        .iter()
        .map(|&w| {
            // Y is traceless, so adding ρ·Tr(·) removes the null direction
            // at ω = 0 without changing the solution
            let mut a = l.clone();
            for i in 0..4 {
                a[i][i] += C64::new(0.0, w / HBAR);
                a[i][0] += r[i] / HBAR;
                a[i][3] += r[i] / HBAR;
            }
            let z = solve(a, y.iter().map(|v| -v).collect());
            z[1].re
        })
        .collect()
}

fn expm(a: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let s = 0.5f64.powi(squarings);
    let scaled: Vec<Vec<C64>> = a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect();
    let matmul = |x: &[Vec<C64>], y: &[Vec<C64>]| -> Vec<Vec<C64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    let mut result: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..=24 {
        term = matmul(&term, &scaled);
        term.iter_mut().flatten().for_each(|v| *v /= k as f64);
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Stationary correlator C(τ_j) = Tr[σ⁻ e^{Lτ_j}(ρσ⁺ − ⟨σ⁺⟩ρ)] on a uniform
/// grid τ_j = j·h, by repeated application of the exact one-step propagator.
pub fn stationary_correlation(
    p: &DriveParams,
    d: &DissipationParams,
    h: f64,
    points: usize,
) -> Vec<C64> {
    let rho = stationary_state(p, d);
    let sigma_plus = [[ZERO, c(1.0)], [ZERO, ZERO]];
    let seeded = mul(&rho, &sigma_plus);
    let mean_plus = rho[1][0];
    let r = flat(&rho);
    let mut x: Vec<C64> = flat(&seeded)
        .iter()
        .zip(&r)
        .map(|(s, v)| s - mean_plus * v)
        .collect();
    let lh: Vec<Vec<C64>> = generator_matrix(p, d)
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * h).collect())
        .collect();
    let step = expm(&lh);
    let mut out = Vec::with_capacity(points);
    for _ in 0..points {
        out.push(x[1]);
        x = (0..4).map(|i| (0..4).map(|k| step[i][k] * x[k]).sum()).collect();
    }
    out
}

/// Trapezoid `Re Σ w_j e^{iωτ_j/ħ} C_j` on a uniform τ grid.
pub fn trapezoid_spectrum(corr: &[C64], h: f64, omegas: &[f64]) -> Vec<f64> {
    let n = corr.len();
    omegas
        .iter()
        .map(|&w| {
            let mut acc = ZERO;
            for (j, cj) in corr.iter().enumerate() {
                let wt = if j == 0 || j == n - 1 { 0.5 * h } else { h };
                acc += C64::from_polar(wt, w * j as f64 * h / HBAR) * cj;
            }
            acc.re
        })
        .collect()
}
