//! Sampled phase-space fields.
//!
//! Each component is stored row-major with momenta as rows:
//! `values[pt.index()][k * n_x + i]` is the sample at (p_k, x_i).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{InternalPoint, PhaseGrid};

/// Real Wigner function sampled on a grid, four internal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub grid: PhaseGrid,
    pub values: [Vec<f64>; 4],
    pub time_tag: Option<f64>,
}

/// Complex phase-space symbol sampled on a grid, four internal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolField {
    pub grid: PhaseGrid,
    pub values: [Vec<C64>; 4],
}

/// Trapezoid weights for `n` samples spaced `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

impl WignerField {
    pub fn zeros(grid: PhaseGrid) -> Self {
        let n = grid.len();
        Self { grid, values: std::array::from_fn(|_| vec![0.0; n]), time_tag: None }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(InternalPoint, f64, f64) -> f64) -> Self {
        let mut w = Self::zeros(grid);
        for pt in InternalPoint::ALL {
            let comp = &mut w.values[pt.index()];
            for k in 0..grid.n_p {
                let p = grid.p(k);
                for i in 0..grid.n_x {
                    comp[grid.index(k, i)] = f(pt, p, grid.x(i));
                }
            }
        }
        w
    }

    pub fn component(&self, pt: InternalPoint) -> &[f64] {
        &self.values[pt.index()]
    }

    pub fn get(&self, pt: InternalPoint, k: usize, i: usize) -> f64 {
        self.values[pt.index()][self.grid.index(k, i)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_symbol(&self) -> SymbolField {
        SymbolField { grid: self.grid, values: std::array::from_fn(|a| self.values[a].iter().map(|&v| C64::from(v)).collect()) }
    }

    pub fn add(&self, other: &WignerField) -> Result<WignerField> {
        self.grid.require_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> WignerField {
        let mut out = self.clone();
        out.values.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// ∫ pⁿ W(p, x_i, pt) dp for every column i (trapezoid in p).
    pub fn moment_profile(&self, pt: InternalPoint, order: u32) -> Vec<f64> {
        let g = &self.grid;
        let wp = trapezoid_weights(g.n_p, g.dp());
        let comp = self.component(pt);
        let mut out = vec![0.0; g.n_x];
        for (k, w) in wp.iter().enumerate() {
            let f = w * g.p(k).powi(order as i32);
            let row = &comp[k * g.n_x..(k + 1) * g.n_x];
            for (o, v) in out.iter_mut().zip(row) {
                *o += f * v;
            }
        }
        out
    }

    /// Σ over components of [`moment_profile`](Self::moment_profile).
    pub fn total_moment_profile(&self, order: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n_x];
        for pt in InternalPoint::ALL {
            for (o, v) in out.iter_mut().zip(self.moment_profile(pt, order)) {
                *o += v;
            }
        }
        out
    }

    /// Σ_{m,n} ∫∫ W dp dx (trapezoid in both directions).
    pub fn total_integral(&self) -> f64 {
        let wx = trapezoid_weights(self.grid.n_x, self.grid.dx());
        self.total_moment_profile(0).iter().zip(&wx).map(|(v, w)| v * w).sum()
    }
}

impl SymbolField {
    pub fn zeros(grid: PhaseGrid) -> Self {
        let n = grid.len();
        Self { grid, values: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]) }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(InternalPoint, f64, f64) -> C64) -> Self {
        let mut s = Self::zeros(grid);
        for pt in InternalPoint::ALL {
            let comp = &mut s.values[pt.index()];
            for k in 0..grid.n_p {
                let p = grid.p(k);
                for i in 0..grid.n_x {
                    comp[grid.index(k, i)] = f(pt, p, grid.x(i));
                }
            }
        }
        s
    }

    /// Same scalar field on all four components.
    pub fn internally_constant(grid: PhaseGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        Self::from_fn(grid, |_, p, x| f(p, x))
    }

    pub fn component(&self, pt: InternalPoint) -> &[C64] {
        &self.values[pt.index()]
    }

    pub fn get(&self, pt: InternalPoint, k: usize, i: usize) -> C64 {
        self.values[pt.index()][self.grid.index(k, i)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn zip_with(&self, other: &SymbolField, f: impl Fn(C64, C64) -> C64) -> Result<SymbolField> {
        self.grid.require_same(&other.grid)?;
        Ok(SymbolField {
            grid: self.grid,
            values: std::array::from_fn(|a| self.values[a].iter().zip(&other.values[a]).map(|(&x, &y)| f(x, y)).collect()),
        })
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> SymbolField {
        SymbolField { grid: self.grid, values: std::array::from_fn(|a| self.values[a].iter().map(|&v| f(v)).collect()) }
    }

    pub fn add(&self, other: &SymbolField) -> Result<SymbolField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymbolField) -> Result<SymbolField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> SymbolField {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> SymbolField {
        self.map(|v| v.conj())
    }

    /// (Σ_{pt} Σ |v|² Δp Δx)^{1/2}
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s * self.grid.dp() * self.grid.dx()).sqrt()
    }

    /// L² norm of the imaginary parts alone.
    pub fn imag_l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().flatten().map(|v| v.im * v.im).sum();
        (s * self.grid.dp() * self.grid.dx()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> WignerField {
        WignerField { grid: self.grid, values: std::array::from_fn(|a| self.values[a].iter().map(|v| v.re).collect()), time_tag: None }
    }

    /// Real Wigner field, refusing when imaginary parts exceed `tol`.
    pub fn to_wigner(&self, tol: f64) -> Result<WignerField> {
        let worst = self.values.iter().flatten().map(|v| v.im.abs()).fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::domain(format!("symbol is not real (max |Im| = {worst:e})")));
        }
        Ok(self.real_part())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new((-8.0, 8.0), 161, (-8.0, 8.0), 161).unwrap()
    }

    #[test]
    fn gaussian_integrates_to_one() {
        let g = grid();
        let w = WignerField::from_fn(
            g,
            |pt, p, x| {
                if pt == InternalPoint::ALL[3] {
                    (-(x * x) - p * p).exp() / std::f64::consts::PI
                } else {
                    0.0
                }
            },
        );
        assert!((w.total_integral() - 1.0).abs() < 1e-12);
        let m1 = w.total_moment_profile(1);
        assert!(m1.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn norms_and_arithmetic() {
        let g = grid();
        let s = SymbolField::internally_constant(g, C64::new);
        let z = s.sub(&s).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(s.conj().add(&s).unwrap().imag_l2_norm() == 0.0);
        assert!(s.to_wigner(1e-12).is_err());
    }
}
