//! 2×2 complex matrices in the basis (|1⟩, |0⟩).
//!
//! Row/column index 0 is |1⟩ and index 1 is |0⟩, so the upper spinor
//! component is the |1⟩ amplitude.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub m: [[C64; 2]; 2],
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Matrix2 {
    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self::new([[C64::from(m[0][0]), C64::from(m[0][1])], [C64::from(m[1][0]), C64::from(m[1][1])]])
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// |1⟩⟨1|
    pub const fn proj_one() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ZERO]])
    }

    /// |0⟩⟨0|
    pub const fn proj_zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Self::new([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    /// σ_z|1⟩ = |1⟩, σ_z|0⟩ = −|0⟩.
    pub const fn sigma_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// Hermitian matrix with diagonal (h11, h00) and upper off-diagonal entry
    /// ⟨1|H|0⟩ = h10.
    pub fn hermitian(h11: f64, h00: f64, h10: C64) -> Self {
        Self::new([[C64::from(h11), h10], [h10.conj(), C64::from(h00)]])
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.m;
        Self::new([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc * *self)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.m;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// ⟨u|self|v⟩
    pub fn sandwich(&self, u: [C64; 2], v: [C64; 2]) -> C64 {
        let w = self.apply(v);
        u[0].conj() * w[0] + u[1].conj() * w[1]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.adjoint()).max_abs_diff(&Self::identity()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Matrix2::new(out)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        self + (-rhs)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(C64::from(-1.0))
    }
}

impl Mul<Matrix2> for C64 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        rhs.scale(self)
    }
}

impl Mul<Matrix2> for f64 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        rhs.scale(C64::from(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let i = C64::new(0.0, 1.0);
        assert_eq!(Matrix2::sigma_x() * Matrix2::sigma_y(), i * Matrix2::sigma_z());
        assert_eq!(Matrix2::sigma_x() * Matrix2::sigma_x(), Matrix2::identity());
        assert_eq!(Matrix2::proj_one() + Matrix2::proj_zero(), Matrix2::identity());
        assert_eq!(Matrix2::proj_one() - Matrix2::proj_zero(), Matrix2::sigma_z());
    }

    #[test]
    fn sandwich_matches_explicit_product() {
        let a = Matrix2::hermitian(0.5, -1.0, C64::new(0.25, 0.75));
        let u = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0)];
        let v = [C64::new(0.0, 1.0), C64::new(3.0, -1.0)];
        let direct = u[0].conj() * (a.m[0][0] * v[0] + a.m[0][1] * v[1]) + u[1].conj() * (a.m[1][0] * v[0] + a.m[1][1] * v[1]);
        assert!((a.sandwich(u, v) - direct).norm() < 1e-15);
        assert!(a.is_hermitian(0.0));
    }
}
