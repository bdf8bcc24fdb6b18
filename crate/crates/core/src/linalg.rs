//! Small fixed-size complex matrices for the two-level problem, plus a dense
//! row-major complex matrix used by the Floquet code.
//!
//! Basis ordering is (x, g) everywhere: index 0 is the exciton, index 1 the
//! ground state.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const X: usize = 0;
pub const G: usize = 1;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// 2×2 complex operator in the (x, g) basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Operator2(pub [[C64; 2]; 2]);

impl Operator2 {
    pub const fn zero() -> Self {
        Operator2([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Operator2([[ONE, ZERO], [ZERO, ONE]])
    }

    /// σ⁻ = |g⟩⟨x|.
    pub const fn sigma_minus() -> Self {
        let mut m = [[ZERO; 2]; 2];
        m[G][X] = ONE;
        Operator2(m)
    }

    /// σ⁺ = |x⟩⟨g|.
    pub const fn sigma_plus() -> Self {
        let mut m = [[ZERO; 2]; 2];
        m[X][G] = ONE;
        Operator2(m)
    }

    /// σ⁺σ⁻ = |x⟩⟨x|.
    pub const fn excited_projector() -> Self {
        let mut m = [[ZERO; 2]; 2];
        m[X][X] = ONE;
        Operator2(m)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Operator2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Operator2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest absolute element.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Column-major vectorization: index `i + 2j` holds element (i, j).
    pub fn vec(&self) -> [C64; 4] {
        let m = &self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1]]
    }

    pub fn from_vec(v: &[C64]) -> Self {
        Operator2([[v[0], v[2]], [v[1], v[3]]])
    }
}

impl Index<(usize, usize)> for Operator2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Operator2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Operator2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Operator2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Operator2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Tolerances of the density-matrix validity predicate.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// State of the emitter: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2(Operator2);

impl DensityMatrix2 {
    /// Wraps an operator after checking the validity predicate.
    pub fn new(op: Operator2) -> Result<Self> {
        let rho = DensityMatrix2(op);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps without checking. Callers are responsible for validity.
    pub(crate) fn new_unchecked(op: Operator2) -> Self {
        DensityMatrix2(op)
    }

    pub fn ground() -> Self {
        let mut m = Operator2::zero();
        m[(G, G)] = ONE;
        DensityMatrix2(m)
    }

    pub fn excited() -> Self {
        let mut m = Operator2::zero();
        m[(X, X)] = ONE;
        DensityMatrix2(m)
    }

    pub fn as_operator(&self) -> &Operator2 {
        &self.0
    }

    pub fn excited_population(&self) -> f64 {
        self.0[(X, X)].re
    }

    pub fn ground_population(&self) -> f64 {
        self.0[(G, G)].re
    }

    /// ρ_xg = ⟨σ⁻⟩.
    pub fn coherence(&self) -> C64 {
        self.0[(X, G)]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Hermiticity defect max|ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.dagger()).max_abs()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.0[(X, X)].re;
        let d = self.0[(G, G)].re;
        let b = self.0[(X, G)];
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        mean - half_gap
    }

    /// Hermitian to 1e-12 relative, trace one to 1e-10, eigenvalues ≥ −1e-9.
    pub fn check(&self) -> Result<()> {
        let scale = self.0.max_abs().max(1.0);
        let herm = self.hermiticity_defect();
        if !(herm <= HERMITIAN_TOL * scale) {
            return Err(Error::StateInvalid(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.0.trace();
        if !((tr - ONE).norm() <= TRACE_TOL) {
            return Err(Error::StateInvalid(format!("trace {tr} differs from 1")));
        }
        let lmin = self.min_eigenvalue();
        if !(lmin >= -POSITIVITY_TOL) {
            return Err(Error::StateInvalid(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// Replaces the operator by its Hermitian part divided by its trace.
    /// Returns the size of the applied correction (max element change).
    pub(crate) fn project(op: &Operator2) -> (Self, f64) {
        let herm = (*op + op.dagger()).scale(C64::new(0.5, 0.0));
        let tr = herm.trace().re;
        let fixed = herm.scale(C64::new(1.0 / tr, 0.0));
        let correction = (fixed - *op).max_abs();
        (DensityMatrix2(fixed), correction)
    }
}

/// 4×4 superoperator acting on column-major vectorized 2×2 operators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Superoperator4(pub [[C64; 4]; 4]);

impl Superoperator4 {
    pub fn zero() -> Self {
        Superoperator4([[ZERO; 4]; 4])
    }

    /// Superoperator of ρ ↦ AρB, i.e. Bᵀ ⊗ A on vec(ρ).
    pub fn sandwich(a: &Operator2, b: &Operator2) -> Self {
        let mut s = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        s.0[i + 2 * j][k + 2 * l] = a[(i, k)] * b[(l, j)];
                    }
                }
            }
        }
        s
    }

    pub fn left(a: &Operator2) -> Self {
        Self::sandwich(a, &Operator2::identity())
    }

    pub fn right(b: &Operator2) -> Self {
        Self::sandwich(&Operator2::identity(), b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply_op(&self, op: &Operator2) -> Operator2 {
        Operator2::from_vec(&self.apply(&op.vec()))
    }
}

impl Add for Superoperator4 {
    type Output = Superoperator4;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for Superoperator4 {
    type Output = Superoperator4;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

/// Rank of a 4×4 matrix by Gaussian elimination with partial pivoting;
/// pivots below `rel_tol·max|a|` count as zero.
pub fn rank4(a: &[[C64; 4]; 4], rel_tol: f64) -> usize {
    let mut m = *a;
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..4 {
        if row == 4 {
            break;
        }
        let piv = (row..4)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        if m[piv][col].norm() <= tol {
            continue;
        }
        m.swap(row, piv);
        for i in row + 1..4 {
            let f = m[i][col] / m[row][col];
            for j in col..4 {
                let v = m[row][j];
                m[i][j] -= f * v;
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

/// Solves `a x = b` for a 4×4 system; `None` if singular.
pub fn solve4(a: &[[C64; 4]; 4], b: &[C64; 4]) -> Option<[C64; 4]> {
    let mut m = *a;
    let mut r = *b;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for i in col + 1..4 {
            let f = m[i][col] / m[col][col];
            for j in col..4 {
                let v = m[col][j];
                m[i][j] -= f * v;
            }
            let v = r[col];
            r[i] -= f * v;
        }
    }
    let mut x = [ZERO; 4];
    for i in (0..4).rev() {
        let s: C64 = (i + 1..4).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sigma_minus_layout() {
        let sm = Operator2::sigma_minus();
        assert_eq!(sm[(G, X)], ONE);
        assert_eq!(sm.max_abs(), 1.0);
        assert_eq!(sm.dagger(), Operator2::sigma_plus());
        assert_eq!(Operator2::sigma_plus() * sm, Operator2::excited_projector());
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let a = Operator2([[c(1.0, 2.0), c(-0.5, 0.1)], [c(0.3, -1.0), c(2.0, 0.0)]]);
        let b = Operator2([[c(0.0, 1.0), c(1.5, 0.0)], [c(-2.0, 0.2), c(0.7, -0.7)]]);
        let r = Operator2([[c(0.4, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.6, 0.0)]]);
        let direct = a * r * b;
        let via = Superoperator4::sandwich(&a, &b).apply_op(&r);
        assert!((direct - via).max_abs() < 1e-14);
    }

    #[test]
    fn validity_predicate() {
        assert!(DensityMatrix2::ground().is_valid());
        let bad = Operator2([[c(1.2, 0.0), ZERO], [ZERO, c(-0.2, 0.0)]]);
        assert!(DensityMatrix2::new(bad).is_err());
        let not_herm = Operator2([[c(0.5, 0.0), c(0.1, 0.0)], [c(0.2, 0.0), c(0.5, 0.0)]]);
        assert!(DensityMatrix2::new(not_herm).is_err());
        let pure_plus = Operator2([[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]]);
        let rho = DensityMatrix2::new(pure_plus).unwrap();
        assert!(rho.min_eigenvalue().abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }
}
