//! Dense Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form followed by implicit-shift QL.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Eigen-decomposition with eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

/// Iteration budget per matrix dimension.
const SWEEPS_PER_DIM: usize = 30;

/// Reduces `a` in place to tridiagonal form and returns the accumulated
/// unitary Q with A = Q T Q†, plus the diagonal and (complex) subdiagonal.
fn tridiagonalize(a: &mut CMatrix) -> (CMatrix, Vec<f64>, Vec<C64>) {
    let n = a.dim();
    let mut q = CMatrix::identity(n);
    let zero = C64::new(0.0, 0.0);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = τ A v on the trailing block
        let p: Vec<C64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| a[(k + 1 + i, k + 1 + j)] * v[j])
                    .sum::<C64>()
                    * tau
            })
            .collect();
        let vp: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kfac = 0.5 * tau * vp.re;
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kfac).collect();
        for i in 0..m {
            for j in 0..m {
                a[(k + 1 + i, k + 1 + j)] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        // Q ← Q (I − τ v v†)
        for r in 0..n {
            let s: C64 = (0..m).map(|j| q[(r, k + 1 + j)] * v[j]).sum::<C64>() * tau;
            for j in 0..m {
                q[(r, k + 1 + j)] -= s * v[j].conj();
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let sub = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    (q, diag, sub)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix. `e[i]` couples
/// rows i and i+1 (`e.len() == d.len()`, last entry ignored). Rotations are
/// accumulated into the row-major `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let budget = SWEEPS_PER_DIM * n.max(1);
    let mut iterations = 0;

    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > budget {
                return Err(Error::EigensolverFailure { iterations });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi = z[k * n + i];
                    let zi1 = z[k * n + i + 1];
                    z[k * n + i + 1] = s * zi + c * zi1;
                    z[k * n + i] = c * zi - s * zi1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues and eigenvectors of a Hermitian matrix. Only the lower
/// triangle and the real part of the diagonal are trusted.
pub fn eigh(matrix: &CMatrix) -> Result<HermitianEigen> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    // enforce exact Hermiticity from the lower triangle
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in 0..i {
            a[(j, i)] = a[(i, j)].conj();
        }
    }
    let (q, mut d, sub) = tridiagonalize(&mut a);

    // unitary diagonal phases making the subdiagonal real and non-negative
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..sub.len() {
        let mag = sub[k].norm();
        e[k] = mag;
        phases[k + 1] = if mag == 0.0 {
            phases[k]
        } else {
            phases[k] * (sub[k] / mag)
        };
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));

    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            (0..n)
                .map(|r| {
                    (0..n)
                        .map(|i| q[(r, i)] * phases[i] * z[i * n + j])
                        .sum::<C64>()
                })
                .collect()
        })
        .collect();
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(matrix: &CMatrix) -> Result<Vec<f64>> {
    Ok(eigh(matrix)?.values)
}
