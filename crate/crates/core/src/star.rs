//! Star products on ℝ² × Γ².
//!
//! The spatial factor is the 1-D Moyal product
//! f ⋆ g = f exp[(iħ/2)(∂⃖_x ∂⃗_p − ∂⃖_p ∂⃗_x)] g,
//! the internal factor is the discrete product with structure constants
//! ¼ Tr(Ω_a Ω_b Ω_mn). Two production routes exist: a general FFT route for
//! decaying symbols and a differential route for Hamiltonians that are at
//! most quadratic in p.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SymbolField;
use crate::grid::{InternalPoint, PhaseGrid};
use crate::quantizer::{discrete_star_coefficients, HamiltonSymbol, KineticPoly};
use crate::spectral::{frequencies, FftPair};

const ZERO: C64 = C64::new(0.0, 0.0);

// ---------------------------------------------------------------------------
// discrete factor

/// Discrete star product through the matrix route:
/// matrix_to_symbol(symbol_to_matrix(f) · symbol_to_matrix(g)).
pub fn star_discrete(f: &[C64; 4], g: &[C64; 4]) -> [C64; 4] {
    let coeff = discrete_star_coefficients();
    std::array::from_fn(|mn| {
        let mut s = ZERO;
        for a in 0..4 {
            for b in 0..4 {
                s += coeff[mn][a][b] * f[a] * g[b];
            }
        }
        s
    })
}

fn sign(k: u8) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The internal brace factor of the phase-space star product, written out
/// term by term, for f at (m', n'), g at (m'', n'') and output (m, n).
pub fn discrete_brace(out: InternalPoint, f: InternalPoint, g: InternalPoint) -> C64 {
    let (m, n) = (out.m, out.n);
    let (m1, n1) = (f.m, f.n);
    let (m2, n2) = (g.m, g.n);
    let re = (1.0 + sign(m1 + m2)) * (1.0 + sign(n1 + n2))
        + sign(m) * (sign(m1) + sign(m2))
        + sign(m + n) * (sign(m1 + n1) + sign(m2 + n2))
        + sign(n) * (sign(n1) + sign(n2));
    let im = sign(m) * sign(n1 + n2) * (sign(m1) - sign(m2))
        + sign(m + n) * (sign(m2 + n1) - sign(m1 + n2))
        + sign(n) * sign(m1 + m2) * (sign(n2) - sign(n1));
    C64::new(re, im)
}

/// Discrete star product by direct summation of the brace factor over
/// spatially constant profiles (independent of the quantizer matrices).
pub fn star_discrete_direct(f: &[C64; 4], g: &[C64; 4]) -> [C64; 4] {
    std::array::from_fn(|mn| {
        let out = InternalPoint::from_index(mn);
        let mut s = ZERO;
        for a in InternalPoint::ALL {
            for b in InternalPoint::ALL {
                s += discrete_brace(out, a, b) / 16.0 * f[a.index()] * g[b.index()];
            }
        }
        s
    })
}

// ---------------------------------------------------------------------------
// continuous factor, FFT route

/// Signed spectral index of FFT bin k for length n.
fn signed_index(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn bin_of(t: i64, n: usize) -> Option<usize> {
    let lo = -((n / 2) as i64);
    let hi = ((n - 1) / 2) as i64;
    if t < lo || t > hi {
        None
    } else {
        Some(t.rem_euclid(n as i64) as usize)
    }
}

/// Coefficients of a trigonometric expansion in p, laid out [j][x]:
/// f(x, p) = Σ_j F_j(x) e^{iθ_j (p − p_min)}.
fn p_spectrum(values: &[C64], grid: &PhaseGrid, fft_p: &FftPair) -> Vec<C64> {
    let (n_x, n_p) = (grid.n_x, grid.n_p);
    let mut out = vec![ZERO; n_x * n_p];
    let cols: Vec<Vec<C64>> = (0..n_x)
        .into_par_iter()
        .map(|i| {
            let mut col: Vec<C64> = (0..n_p).map(|k| values[k * n_x + i]).collect();
            fft_p.forward(&mut col);
            col.iter_mut().for_each(|v| *v /= n_p as f64);
            col
        })
        .collect();
    for (i, col) in cols.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            out[j * n_x + i] = *v;
        }
    }
    out
}

/// Inverse of [`p_spectrum`].
fn p_synthesis(spec: &[C64], grid: &PhaseGrid, fft_p: &FftPair) -> Vec<C64> {
    let (n_x, n_p) = (grid.n_x, grid.n_p);
    let mut out = vec![ZERO; n_x * n_p];
    let cols: Vec<Vec<C64>> = (0..n_x)
        .into_par_iter()
        .map(|i| {
            let mut col: Vec<C64> = (0..n_p).map(|j| spec[j * n_x + i]).collect();
            fft_p.inverse(&mut col);
            col.iter_mut().for_each(|v| *v *= n_p as f64);
            col
        })
        .collect();
    for (i, col) in cols.iter().enumerate() {
        for (k, v) in col.iter().enumerate() {
            out[k * n_x + i] = *v;
        }
    }
    out
}

struct Spectra {
    /// F_j(x) rows
    rows: Vec<C64>,
    /// x-transform of each row
    hat: Vec<C64>,
    /// largest |F_j| per row
    row_max: Vec<f64>,
}

fn spectra(values: &[C64], grid: &PhaseGrid, fft_p: &FftPair, fft_x: &FftPair) -> Spectra {
    let n_x = grid.n_x;
    let rows = p_spectrum(values, grid, fft_p);
    let mut hat = rows.clone();
    hat.par_chunks_mut(n_x).for_each(|r| fft_x.forward(r));
    let row_max = rows.chunks(n_x).map(|r| r.iter().map(|v| v.norm()).fold(0.0, f64::max)).collect();
    Spectra { rows, hat, row_max }
}

/// Row j of `s` evaluated at x + delta.
fn shifted_row(s: &Spectra, j: usize, delta: f64, kx: &[f64], fft_x: &FftPair, n_x: usize, buf: &mut [C64]) {
    if delta == 0.0 {
        buf.copy_from_slice(&s.rows[j * n_x..(j + 1) * n_x]);
        return;
    }
    for ((b, h), k) in buf.iter_mut().zip(&s.hat[j * n_x..(j + 1) * n_x]).zip(kx) {
        *b = h * C64::from_polar(1.0, k * delta);
    }
    fft_x.inverse(buf);
}

/// Σ_{a,b} coeff[out][a][b] · (f_a ⋆ g_b) for every output, FFT route.
///
/// With f = A(x)e^{iθp} and g = B(x)e^{iθ'p} the Moyal product is
/// A(x − ħθ'/2)·B(x + ħθ/2)·e^{i(θ+θ')p}; the x-shifts are spectral and
/// frequency sums outside the p band are dropped. Work is split into a fixed
/// number of chunks summed in order, so results do not depend on scheduling.
fn twisted_products(fs: &[&[C64]], gs: &[&[C64]], coeff: &[Vec<Vec<C64>>], grid: &PhaseGrid) -> Vec<Vec<C64>> {
    let (n_x, n_p) = (grid.n_x, grid.n_p);
    let fft_p = FftPair::new(n_p);
    let fft_x = FftPair::new(n_x);
    let kx = frequencies(n_x, grid.dx());
    let theta: Vec<f64> = (0..n_p).map(|j| 2.0 * PI * signed_index(j, n_p) as f64 / (n_p as f64 * grid.dp())).collect();
    let fsp: Vec<Spectra> = fs.iter().map(|f| spectra(f, grid, &fft_p, &fft_x)).collect();
    let gsp: Vec<Spectra> = gs.iter().map(|g| spectra(g, grid, &fft_p, &fft_x)).collect();
    let active = |sp: &[Spectra]| -> Vec<usize> {
        let peak = sp.iter().flat_map(|s| s.row_max.iter()).fold(0.0f64, |m, &v| m.max(v));
        (0..n_p).filter(|&j| sp.iter().any(|s| s.row_max[j] > 1e-17 * peak)).collect()
    };
    let (act_f, act_g) = (active(&fsp), active(&gsp));
    let n_out = coeff.len();
    let hbar = grid.hbar;
    const CHUNKS: usize = 32;
    let chunk_len = act_f.len().div_ceil(CHUNKS).max(1);
    let partials: Vec<Vec<Vec<C64>>> = act_f
        .par_chunks(chunk_len)
        .map(|js| {
            let mut acc = vec![vec![ZERO; n_x * n_p]; n_out];
            let mut a_rows = vec![vec![ZERO; n_x]; fs.len()];
            let mut b_rows = vec![vec![ZERO; n_x]; gs.len()];
            let mut mix = vec![ZERO; n_x];
            for &j in js {
                let tj = signed_index(j, n_p);
                for &l in &act_g {
                    let Some(t) = bin_of(tj + signed_index(l, n_p), n_p) else { continue };
                    for (a, s) in fsp.iter().enumerate() {
                        shifted_row(s, j, -0.5 * hbar * theta[l], &kx, &fft_x, n_x, &mut a_rows[a]);
                    }
                    for (b, s) in gsp.iter().enumerate() {
                        shifted_row(s, l, 0.5 * hbar * theta[j], &kx, &fft_x, n_x, &mut b_rows[b]);
                    }
                    for (o, out) in acc.iter_mut().enumerate() {
                        let target = &mut out[t * n_x..(t + 1) * n_x];
                        for (a, arow) in a_rows.iter().enumerate() {
                            mix.iter_mut().for_each(|v| *v = ZERO);
                            let mut any = false;
                            for (b, brow) in b_rows.iter().enumerate() {
                                let cf = coeff[o][a][b];
                                if cf == ZERO {
                                    continue;
                                }
                                any = true;
                                for (m, v) in mix.iter_mut().zip(brow) {
                                    *m += cf * v;
                                }
                            }
                            if any {
                                for ((tv, av), mv) in target.iter_mut().zip(arow).zip(&mix) {
                                    *tv += av * mv;
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![vec![ZERO; n_x * n_p]; n_out];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            for (a, b) in t.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    total.iter().map(|spec| p_synthesis(spec, grid, &fft_p)).collect()
}

/// Spatial Moyal product of two scalar symbols sampled on `grid`
/// (row-major, momenta as rows). Symbols must decay towards the grid edges.
pub fn star_continuous(f: &[C64], g: &[C64], grid: &PhaseGrid) -> Result<Vec<C64>> {
    grid.validate()?;
    grid.require_p_symmetric()?;
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::arg("symbol sample count does not match the grid"));
    }
    let coeff = vec![vec![vec![C64::new(1.0, 0.0)]]];
    Ok(twisted_products(&[f], &[g], &coeff, grid).remove(0))
}

/// Full star product on ℝ² × Γ²: (f ⋆ g)(mn) = Σ_ab ¼Tr(Ω_aΩ_bΩ_mn) f_a ⋆ g_b.
pub fn star(f: &SymbolField, g: &SymbolField) -> Result<SymbolField> {
    f.grid.require_same(&g.grid)?;
    f.grid.require_p_symmetric()?;
    let c = discrete_star_coefficients();
    let coeff: Vec<Vec<Vec<C64>>> = (0..4).map(|o| (0..4).map(|a| c[o][a].to_vec()).collect()).collect();
    let fs: Vec<&[C64]> = f.values.iter().map(|v| v.as_slice()).collect();
    let gs: Vec<&[C64]> = g.values.iter().map(|v| v.as_slice()).collect();
    let mut out = twisted_products(&fs, &gs, &coeff, &f.grid);
    Ok(SymbolField { grid: f.grid, values: std::array::from_fn(|a| std::mem::take(&mut out[a])) })
}

/// (f ⋆ g − g ⋆ f)/(iħ), FFT route.
pub fn moyal_bracket(f: &SymbolField, g: &SymbolField) -> Result<SymbolField> {
    let fg = star(f, g)?;
    let gf = star(g, f)?;
    let s = C64::new(0.0, -1.0 / f.grid.hbar);
    fg.zip_with(&gf, |a, b| (a - b) * s)
}

/// Multiply a symbol by a smooth flat-top window in p that is 1 well inside
/// [p_min + margin, p_max − margin] and decays like erfc outside. Used to
/// feed non-decaying Hamiltonians to the FFT route.
pub fn window_in_p(f: &SymbolField, margin: f64, width: f64) -> SymbolField {
    let g = f.grid;
    let (lo, hi) = (g.p_min + margin, g.p_max - margin);
    let mut out = f.clone();
    for comp in out.values.iter_mut() {
        for k in 0..g.n_p {
            let p = g.p(k);
            let w = 0.5 * (libm::erf((p - lo) / width) - libm::erf((p - hi) / width));
            for v in &mut comp[k * g.n_x..(k + 1) * g.n_x] {
                *v *= w;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// differential route

/// Terms (order n, coefficient) of the expansion
/// h(p) ⋆ g = Σ_n (1/n!)(−iħ/2)^n h^{(n)}(p) ∂_x^n g for a kinetic polynomial
/// (left action; the right action flips the sign of i). Polynomials of
/// degree ≤ 2 terminate after n = 2.
pub fn kinetic_expansion(kin: &KineticPoly, hbar: f64, left: bool) -> Vec<(u32, KineticPoly, C64)> {
    let s = if left { -1.0 } else { 1.0 };
    let d1 = KineticPoly { c0: kin.c1, c1: 2.0 * kin.c2, c2: 0.0 };
    let d2 = KineticPoly { c0: 2.0 * kin.c2, c1: 0.0, c2: 0.0 };
    let mut out = vec![(0, *kin, C64::new(1.0, 0.0))];
    if d1 != (KineticPoly { c0: 0.0, c1: 0.0, c2: 0.0 }) {
        out.push((1, d1, C64::new(0.0, s * 0.5 * hbar)));
    }
    if d2.c0 != 0.0 {
        // (1/2)(±iħ/2)² = −ħ²/8
        out.push((2, d2, C64::new(-hbar * hbar / 8.0, 0.0)));
    }
    out
}

/// Per-component x-derivatives of order 1 and 2 (rows transformed along x).
fn x_derivatives(w: &SymbolField, max_order: u32) -> XDerivatives {
    let g = w.grid;
    if max_order == 0 {
        return XDerivatives { first: None, second: None };
    }
    let fft = FftPair::new(g.n_x);
    let n = g.n_x;
    let nyquist = n.is_multiple_of(2);
    let ks = frequencies(n, g.dx());
    let wn = PI / g.dx();
    // multipliers ik and −k², with the odd Nyquist term dropped
    let m1: Vec<C64> = ks.iter().map(|k| C64::new(0.0, *k)).collect();
    let m2: Vec<C64> = ks.iter().enumerate().map(|(j, k)| C64::from(if nyquist && 2 * j == n { -wn * wn } else { -k * k })).collect();
    let mut first: [Vec<C64>; 4] = std::array::from_fn(|a| w.values[a].clone());
    let mut second: [Vec<C64>; 4] = std::array::from_fn(|_| if max_order >= 2 { vec![ZERO; g.len()] } else { Vec::new() });
    for a in 0..4 {
        let work = |(r1, r2): (&mut [C64], &mut [C64])| {
            fft.forward(r1);
            if !r2.is_empty() {
                for ((d, s), m) in r2.iter_mut().zip(r1.iter()).zip(&m2) {
                    *d = s * m;
                }
                fft.inverse(r2);
            }
            for (v, m) in r1.iter_mut().zip(&m1) {
                *v *= m;
            }
            fft.inverse(r1);
        };
        if max_order >= 2 {
            first[a].par_chunks_mut(n).zip(second[a].par_chunks_mut(n)).for_each(work);
        } else {
            first[a].par_chunks_mut(n).for_each(|r1| work((r1, &mut [])));
        }
    }
    XDerivatives { first: Some(first), second: if max_order >= 2 { Some(second) } else { None } }
}

struct XDerivatives {
    first: Option<[Vec<C64>; 4]>,
    second: Option<[Vec<C64>; 4]>,
}

fn kinetic_order(h: &HamiltonSymbol) -> u32 {
    h.kinetic
        .iter()
        .map(|k| {
            if k.c2 != 0.0 {
                2
            } else if k.c1 != 0.0 {
                1
            } else {
                0
            }
        })
        .max()
        .unwrap_or(0)
}

/// V ⋆ w (left) or w ⋆ V (right) for a position-only profile V, via the
/// p-spectrum: V(x ∓ ħθ/2) multiplies each e^{iθp} mode.
fn potential_star(values: &[C64], grid: &PhaseGrid, v: &(dyn Fn(f64) -> f64 + Sync), left: bool) -> Vec<C64> {
    let (n_x, n_p) = (grid.n_x, grid.n_p);
    let fft_p = FftPair::new(n_p);
    let theta: Vec<f64> = (0..n_p).map(|j| 2.0 * PI * signed_index(j, n_p) as f64 / (n_p as f64 * grid.dp())).collect();
    let s = if left { -0.5 } else { 0.5 } * grid.hbar;
    let cols: Vec<Vec<C64>> = (0..n_x)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut col: Vec<C64> = (0..n_p).map(|k| values[k * n_x + i]).collect();
            fft_p.forward(&mut col);
            for (c, th) in col.iter_mut().zip(&theta) {
                *c *= v(x + s * th);
            }
            fft_p.inverse(&mut col);
            col
        })
        .collect();
    let mut out = vec![ZERO; n_x * n_p];
    for (i, col) in cols.iter().enumerate() {
        for (k, c) in col.iter().enumerate() {
            out[k * n_x + i] = *c;
        }
    }
    out
}

/// H ⋆ W (left = true) or W ⋆ H (left = false) by the terminating
/// differential expansion.
fn apply_hamiltonian(h: &HamiltonSymbol, w: &SymbolField, left: bool, derivs: &XDerivatives) -> Result<SymbolField> {
    let g = w.grid;
    let max_order = kinetic_order(h) as usize;
    let (d1, d2) = (&derivs.first, &derivs.second);
    let pot: Option<[Vec<C64>; 4]> = if h.has_potential() {
        let v = |x: f64| h.potential.eval(x);
        Some(std::array::from_fn(|b| potential_star(&w.values[b], &g, &v, left)))
    } else {
        None
    };
    // per-row kinetic coefficients kin[order][a][k] of H_a
    let ps = g.ps();
    let mut kin = vec![[vec![ZERO; g.n_p], vec![ZERO; g.n_p], vec![ZERO; g.n_p], vec![ZERO; g.n_p]]; 3];
    for (a, k) in h.kinetic.iter().enumerate() {
        for (order, poly, pref) in kinetic_expansion(k, g.hbar, left) {
            for (c, p) in kin[order as usize][a].iter_mut().zip(&ps) {
                *c += pref * poly.eval(*p);
            }
        }
    }
    let coeff = discrete_star_coefficients();
    let sources = |order: usize, b: usize| -> &[C64] {
        match order {
            0 => &w.values[b],
            1 => &d1.as_ref().expect("first derivatives")[b],
            _ => &d2.as_ref().expect("second derivatives")[b],
        }
    };
    // result_mn = Σ_b (Σ_a C[mn][a][b]·H_a) acting on W_b
    let values: Vec<Vec<C64>> = (0..4)
        .into_par_iter()
        .map(|mn| {
            let mut out = vec![ZERO; g.len()];
            for b in 0..4 {
                let cf = |a: usize| if left { coeff[mn][a][b] } else { coeff[mn][b][a] };
                for (order, table) in kin.iter().enumerate().take(max_order + 1) {
                    let row: Vec<C64> = (0..g.n_p).map(|k| (0..4).map(|a| cf(a) * table[a][k]).sum()).collect();
                    if row.iter().all(|c| *c == ZERO) {
                        continue;
                    }
                    let src = sources(order, b);
                    for (k, f) in row.iter().enumerate() {
                        if *f == ZERO {
                            continue;
                        }
                        for (o, s) in out[k * g.n_x..(k + 1) * g.n_x].iter_mut().zip(&src[k * g.n_x..(k + 1) * g.n_x]) {
                            *o += f * s;
                        }
                    }
                }
                if let Some(pot) = &pot {
                    let c: C64 = (0..4).map(|a| cf(a) * h.coupling[a]).sum();
                    if c != ZERO {
                        for (o, s) in out.iter_mut().zip(&pot[b]) {
                            *o += c * s;
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut result = SymbolField::zeros(g);
    for (dst, v) in result.values.iter_mut().zip(values) {
        *dst = v;
    }
    Ok(result)
}

/// H ⋆ W through the terminating differential expansion (kinetic part) and
/// the spectral p-shift rule (potential part).
pub fn star_apply_hamiltonian(h: &HamiltonSymbol, w: &SymbolField) -> Result<SymbolField> {
    apply_hamiltonian(h, w, true, &x_derivatives(w, kinetic_order(h)))
}

/// W ⋆ H, same route as [`star_apply_hamiltonian`].
pub fn star_apply_hamiltonian_right(h: &HamiltonSymbol, w: &SymbolField) -> Result<SymbolField> {
    apply_hamiltonian(h, w, false, &x_derivatives(w, kinetic_order(h)))
}

/// {W, H}_M = (W ⋆ H − H ⋆ W)/(iħ), differential route.
pub fn moyal_bracket_hamiltonian(w: &SymbolField, h: &HamiltonSymbol) -> Result<SymbolField> {
    let wh = star_apply_hamiltonian_right(h, w)?;
    let hw = star_apply_hamiltonian(h, w)?;
    let s = C64::new(0.0, -1.0 / w.grid.hbar);
    wh.zip_with(&hw, |a, b| (a - b) * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    /// ‖H ⋆ W − E·W‖
    pub residual: f64,
    /// ‖Im(H ⋆ W)‖
    pub imaginary: f64,
    /// ‖W‖
    pub norm: f64,
}

/// Residual of the star eigenvalue equation H ⋆ W = E·W on the grid.
pub fn star_eigen_residual(h: &HamiltonSymbol, w: &SymbolField, energy: f64) -> Result<EigenResidual> {
    let hw = star_apply_hamiltonian(h, w)?;
    let r = hw.zip_with(w, |a, b| a - energy * b)?;
    Ok(EigenResidual { residual: r.l2_norm(), imaginary: hw.imag_l2_norm(), norm: w.l2_norm() })
}

// ---------------------------------------------------------------------------
// time evolution

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<SymbolField>,
    pub hamiltonian: HamiltonSymbol,
}

/// ∂W/∂t = (H ⋆ W − W ⋆ H)/(iħ)
pub fn liouville_rhs(h: &HamiltonSymbol, w: &SymbolField) -> Result<SymbolField> {
    let derivs = x_derivatives(w, kinetic_order(h));
    let hw = apply_hamiltonian(h, w, true, &derivs)?;
    let wh = apply_hamiltonian(h, w, false, &derivs)?;
    let s = C64::new(0.0, -1.0 / w.grid.hbar);
    hw.zip_with(&wh, |a, b| (a - b) * s)
}

/// Largest stable RK4 step for the Liouville operator on this grid: the
/// spectral transport term has eigenvalues up to v_max·π/Δx, the internal
/// and potential terms add frequencies up to 2Mc²/ħ and ΔV/ħ, and the
/// classical RK4 scheme is stable on the imaginary axis up to 2√2.
pub fn max_stable_dt(h: &HamiltonSymbol, grid: &PhaseGrid) -> f64 {
    let pmax = grid.p_min.abs().max(grid.p_max.abs());
    let v_max = h.kinetic.iter().map(|k| (k.c1 + 2.0 * k.c2 * pmax).abs().max((k.c1 - 2.0 * k.c2 * pmax).abs())).fold(0.0, f64::max);
    let transport = v_max * PI / grid.dx();
    let c0s: Vec<f64> = h.kinetic.iter().map(|k| k.c0).collect();
    let internal = (c0s.iter().cloned().fold(f64::MIN, f64::max) - c0s.iter().cloned().fold(f64::MAX, f64::min)) / grid.hbar;
    let potential = if h.has_potential() {
        let vs: Vec<f64> = grid.xs().iter().map(|&x| h.potential.eval(x)).collect();
        let spread = vs.iter().cloned().fold(f64::MIN, f64::max) - vs.iter().cloned().fold(f64::MAX, f64::min);
        spread * h.coupling.iter().map(|c| c.abs()).fold(0.0, f64::max) / grid.hbar
    } else {
        0.0
    };
    let rate = transport + internal + potential;
    if rate == 0.0 {
        f64::INFINITY
    } else {
        2.0 * 2f64.sqrt() / rate
    }
}

/// Classical RK4 integration of ∂W/∂t + {W, H}_M = 0 from t = 0 to `t_end`,
/// recording every `sample_every`-th step (and the final state).
pub fn evolve(w0: &SymbolField, h: &HamiltonSymbol, t_end: f64, dt: f64, sample_every: usize) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::arg("need dt > 0 and t_end >= 0"));
    }
    let limit = max_stable_dt(h, &w0.grid);
    if dt > limit {
        return Err(Error::arg(format!("time step {dt} exceeds the stability bound {limit}")));
    }
    let steps = (t_end / dt).round() as usize;
    if (steps as f64 * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::arg("t_end must be an integer multiple of dt"));
    }
    let every = sample_every.max(1);
    let mut times = vec![0.0];
    let mut frames = vec![w0.clone()];
    let mut w = w0.clone();
    for step in 1..=steps {
        let k1 = liouville_rhs(h, &w)?;
        let k2 = liouville_rhs(h, &w.zip_with(&k1, |a, b| a + 0.5 * dt * b)?)?;
        let k3 = liouville_rhs(h, &w.zip_with(&k2, |a, b| a + 0.5 * dt * b)?)?;
        let k4 = liouville_rhs(h, &w.zip_with(&k3, |a, b| a + dt * b)?)?;
        for a in 0..4 {
            for (i, v) in w.values[a].iter_mut().enumerate() {
                *v += dt / 6.0 * (k1.values[a][i] + 2.0 * k2.values[a][i] + 2.0 * k3.values[a][i] + k4.values[a][i]);
            }
        }
        if !w.is_finite() {
            return Err(Error::numeric(format!("non-finite field at step {step}"), vec![step as f64 * dt]));
        }
        if step % every == 0 || step == steps {
            times.push(step as f64 * dt);
            frames.push(w.clone());
        }
    }
    Ok(Trajectory { times, frames, hamiltonian: h.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{hamilton_symbol, matrix_to_symbol, symbol_to_matrix, OperatorSpec, Potential};
    use crate::Matrix2;

    #[test]
    fn matrix_route_equals_brace_sum_on_basis_pairs() {
        let units = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        for a in 0..4 {
            for b in 0..4 {
                for ua in units {
                    for ub in units {
                        let mut f = [ZERO; 4];
                        let mut g = [ZERO; 4];
                        f[a] = ua;
                        g[b] = ub;
                        assert_eq!(star_discrete(&f, &g), star_discrete_direct(&f, &g));
                    }
                }
            }
        }
    }

    #[test]
    fn discrete_star_is_matrix_product() {
        let sx = matrix_to_symbol(&Matrix2::sigma_x());
        let sz = matrix_to_symbol(&Matrix2::sigma_z());
        let prod = star_discrete(&sx, &sz);
        let want = matrix_to_symbol(&(Matrix2::sigma_x() * Matrix2::sigma_z()));
        for a in 0..4 {
            assert!((prod[a] - want[a]).norm() < 1e-15);
        }
        let one = [C64::new(1.0, 0.0); 4];
        assert_eq!(star_discrete(&one, &sz), sz);
        assert!(symbol_to_matrix(&prod).max_abs_diff(&(Matrix2::sigma_x() * Matrix2::sigma_z())) < 1e-15);
    }

    #[test]
    fn quadratic_expansion_terminates() {
        let h = hamilton_symbol(&OperatorSpec::Nonrelativistic { mass: 1.0, potential: Potential::Zero, v00: 1.0, v11: 1.0 }).unwrap();
        let terms = kinetic_expansion(&h.kinetic[0], 1.0, true);
        assert_eq!(terms.iter().map(|t| t.0).max(), Some(2));
        let dirac = hamilton_symbol(&OperatorSpec::Dirac {
            mass: 1.0,
            c: 1.0,
            charge: 1.0,
            potential: Potential::Zero,
            v00: 1.0,
            v11: 1.0,
            v01: ZERO,
        })
        .unwrap();
        assert_eq!(kinetic_expansion(&dirac.kinetic[0], 1.0, true).iter().map(|t| t.0).max(), Some(1));
    }

    fn small_grid() -> PhaseGrid {
        PhaseGrid::new((-8.0, 8.0), 64, (-8.0, 8.0), 64).unwrap()
    }

    #[test]
    fn unit_symbol_is_neutral() {
        let g = small_grid();
        let one = vec![C64::new(1.0, 0.0); g.len()];
        let gauss: Vec<C64> = (0..g.len())
            .map(|idx| {
                let (k, i) = (idx / g.n_x, idx % g.n_x);
                let (p, x) = (g.p(k), g.x(i));
                C64::new((-(x - 0.5).powi(2) - (p + 0.3).powi(2)).exp(), 0.0)
            })
            .collect();
        let left = star_continuous(&one, &gauss, &g).unwrap();
        let right = star_continuous(&gauss, &one, &g).unwrap();
        for ((l, r), w) in left.iter().zip(&right).zip(&gauss) {
            assert!((l - w).norm() < 1e-13);
            assert!((r - w).norm() < 1e-13);
        }
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let g = small_grid();
        let f = SymbolField::from_fn(g, |pt, p, x| C64::new((-(x * x) - p * p).exp() * (1.0 + pt.index() as f64), 0.0));
        let b = moyal_bracket(&f, &f).unwrap();
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn asymmetric_range_is_rejected() {
        let g = PhaseGrid::new((-1.0, 1.0), 8, (-1.0, 2.0), 8).unwrap();
        let v = vec![ZERO; g.len()];
        assert!(star_continuous(&v, &v, &g).is_err());
    }
}
