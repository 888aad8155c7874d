//! Discrete Stratonovich–Weyl frame for two internal levels and the maps
//! between operators and phase-space symbols.
//!
//! Conventions: basis (|1⟩, |0⟩); V = |0⟩⟨0| − |1⟩⟨1|, R = |0⟩⟨1| + |1⟩⟨0|;
//! D(k,l) = e^{−iπkl/2} R^k V^l; kernel sign (−1)^{kl}. The symbol of an
//! internal matrix M at (φ_m, n) is Tr(M·Ω(m,n)), and since
//! Tr(Ω_a Ω_b) = 2δ_ab the inverse is ½ Σ f(m,n) Ω(m,n).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{DistributionalWigner, Term, TermKind, TermRole};
use crate::error::{Error, Result};
use crate::expr::{Affine, Oscillation, Trig, Waveform, Window};
use crate::field::{SymbolField, WignerField};
use crate::grid::{InternalPoint, PhaseGrid};
use crate::matrix::Matrix2;
use crate::spectral::{refine_by_two, shift, FftPair};
use crate::state::{PlaneWavePiece, Representation, SpinorWaveState};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn schwinger_pair() -> (Matrix2, Matrix2) {
    let v = Matrix2::proj_zero() - Matrix2::proj_one();
    let r = Matrix2::sigma_x();
    (v, r)
}

/// e^{−iπkl/2} as an exact fourth root of unity.
fn quarter_phase(kl: i64) -> C64 {
    match kl.rem_euclid(4) {
        0 => c(1.0, 0.0),
        1 => c(0.0, -1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, 1.0),
    }
}

/// D(k,l) = e^{−iπkl/2}·R^k·V^l for any integers (R and V are involutions).
pub fn displacement_d(k: i64, l: i64) -> Matrix2 {
    let (v, r) = schwinger_pair();
    let rk = r.pow(k.rem_euclid(2) as u32);
    let vl = v.pow(l.rem_euclid(2) as u32);
    quarter_phase(k * l) * (rk * vl)
}

/// Ω(m,n) in closed form.
pub fn discrete_quantizer(pt: InternalPoint) -> Matrix2 {
    let h = 0.5;
    match (pt.m, pt.n) {
        (0, 0) => Matrix2::new([[c(0.0, 0.0), c(h, h)], [c(h, -h), c(1.0, 0.0)]]),
        (1, 0) => Matrix2::new([[c(0.0, 0.0), c(-h, -h)], [c(-h, h), c(1.0, 0.0)]]),
        (0, 1) => Matrix2::new([[c(1.0, 0.0), c(h, -h)], [c(h, h), c(0.0, 0.0)]]),
        _ => Matrix2::new([[c(1.0, 0.0), c(-h, h)], [c(-h, -h), c(0.0, 0.0)]]),
    }
}

/// Ω(m,n) = ½ Σ_{k,l} (−1)^{kl} e^{−iπ(km + ln)} D(k,l).
pub fn discrete_quantizer_from_sum(pt: InternalPoint) -> Matrix2 {
    let (m, n) = (pt.m as i64, pt.n as i64);
    let mut acc = Matrix2::zero();
    for k in 0..2i64 {
        for l in 0..2i64 {
            let sign = if (k * l + k * m + l * n) % 2 == 0 { 1.0 } else { -1.0 };
            acc = acc + (0.5 * sign) * displacement_d(k, l);
        }
    }
    acc
}

/// The discrete frame: Schwinger pair, displacements and quantizer matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFrame {
    pub v: Matrix2,
    pub r: Matrix2,
    /// `d[k][l]`
    pub d: [[Matrix2; 2]; 2],
    /// indexed by [`InternalPoint::index`]
    pub omega: [Matrix2; 4],
}

impl DiscreteFrame {
    pub fn new() -> Self {
        let (v, r) = schwinger_pair();
        Self {
            v,
            r,
            d: std::array::from_fn(|k| std::array::from_fn(|l| displacement_d(k as i64, l as i64))),
            omega: std::array::from_fn(|a| discrete_quantizer(InternalPoint::from_index(a))),
        }
    }
}

impl Default for DiscreteFrame {
    fn default() -> Self {
        Self::new()
    }
}

/// f(m,n) = Tr(M·Ω(m,n)), in component order (0,0), (1,0), (0,1), (1,1).
pub fn matrix_to_symbol(mat: &Matrix2) -> [C64; 4] {
    std::array::from_fn(|a| (*mat * discrete_quantizer(InternalPoint::from_index(a))).trace())
}

/// Real symbol of a Hermitian matrix.
pub fn hermitian_symbol(mat: &Matrix2) -> Result<[f64; 4]> {
    if !mat.is_hermitian(1e-12 * (1.0 + mat.trace().norm())) {
        return Err(Error::arg("matrix is not Hermitian"));
    }
    Ok(matrix_to_symbol(mat).map(|z| z.re))
}

/// M = ½ Σ f(m,n) Ω(m,n).
pub fn symbol_to_matrix(f: &[C64; 4]) -> Matrix2 {
    (0..4).fold(Matrix2::zero(), |acc, a| acc + (0.5 * f[a]) * discrete_quantizer(InternalPoint::from_index(a)))
}

pub fn real_symbol_to_matrix(f: &[f64; 4]) -> Matrix2 {
    symbol_to_matrix(&f.map(C64::from))
}

/// Structure constants of the discrete star product:
/// `coeff[mn][a][b] = ¼ Tr(Ω_a Ω_b Ω_mn)`, so that
/// (f ⋆ g)(mn) = Σ_ab coeff[mn][a][b] f(a) g(b).
pub fn discrete_star_coefficients() -> [[[C64; 4]; 4]; 4] {
    let om: [Matrix2; 4] = std::array::from_fn(|a| discrete_quantizer(InternalPoint::from_index(a)));
    std::array::from_fn(|mn| std::array::from_fn(|a| std::array::from_fn(|b| 0.25 * (om[a] * om[b] * om[mn]).trace())))
}

// ---------------------------------------------------------------------------
// continuous part

/// Weyl symbol f(p, x) = ∫ dξ e^{−iξp/ħ} K(x + ξ/2, x − ξ/2) of a kernel
/// sampled on the grid's x lattice (`kernel[i * n_x + j] = K(x_i, x_j)`).
///
/// ξ runs over multiples of Δx. Even multiples land on lattice entries; odd
/// ones need the kernel at half-lattice centres, obtained by a spectral
/// half-step shift along each anti-diagonal. The kernel must decay towards
/// the lattice edges.
pub fn weyl_symbol_of_kernel(kernel: &[C64], grid: &PhaseGrid) -> Result<Vec<C64>> {
    grid.validate()?;
    let n = grid.n_x;
    if kernel.len() != n * n {
        return Err(Error::arg(format!("kernel has {} entries, grid needs {}", kernel.len(), n * n)));
    }
    let dx = grid.dx();
    // centred[d + n - 1][i] = K(x_i + dΔx/2, x_i − dΔx/2), zero when off-lattice
    let centred: Vec<Vec<C64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|dd| {
            let d = dd as i64 - (n as i64 - 1);
            let mut col = vec![C64::new(0.0, 0.0); n];
            if d % 2 == 0 {
                let e = d / 2;
                for (i, v) in col.iter_mut().enumerate() {
                    let (a, b) = (i as i64 + e, i as i64 - e);
                    if (0..n as i64).contains(&a) && (0..n as i64).contains(&b) {
                        *v = kernel[a as usize * n + b as usize];
                    }
                }
            } else {
                // entries K(x_a, x_{a-d}) have centre x_a − dΔx/2 = x_i + Δx/2
                // with i = a − (d + 1)/2
                let off = (d + 1) / 2;
                let mut seq = vec![C64::new(0.0, 0.0); n];
                for (i, v) in seq.iter_mut().enumerate() {
                    let a = i as i64 + off;
                    let b = a - d;
                    if (0..n as i64).contains(&a) && (0..n as i64).contains(&b) {
                        *v = kernel[a as usize * n + b as usize];
                    }
                }
                // seq[i] sits at x_i + Δx/2; shift back by half a step
                let fft = FftPair::new(n);
                shift(&fft, 1.0, &mut seq, -0.5);
                col = seq;
            }
            col
        })
        .collect();
    let ps = grid.ps();
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let base = C64::from_polar(1.0, -dx * ps[k] / grid.hbar);
        let mut ph = base.powi(-(n as i32 - 1));
        for col in &centred {
            for (o, v) in row.iter_mut().zip(col) {
                *o += ph * v;
            }
            ph *= base;
        }
        row.iter_mut().for_each(|v| *v *= dx);
    });
    Ok(out)
}

/// Full symbol of an operator on L²(ℝ) ⊗ ℂ² given by its four kernel blocks
/// `kernels[i][j] = ⟨x, i|Â|x', j⟩` (basis order (|1⟩, |0⟩)):
/// f(p, x, m, n) = Σ_ij Ω(m,n)_ji · weyl(K_ij)(p, x).
pub fn operator_symbol(kernels: &[[Vec<C64>; 2]; 2], grid: &PhaseGrid) -> Result<SymbolField> {
    let mut out = SymbolField::zeros(*grid);
    for i in 0..2 {
        for j in 0..2 {
            let f = weyl_symbol_of_kernel(&kernels[i][j], grid)?;
            for pt in InternalPoint::ALL {
                let w = discrete_quantizer(pt).m[j][i];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, v) in out.values[pt.index()].iter_mut().zip(&f) {
                    *o += w * v;
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hamilton symbols

/// Spatial potential profile V(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// 0 for x < 0, `height` for x ≥ 0
    Step {
        height: f64,
    },
    Linear {
        slope: f64,
    },
    /// ½·k·x²
    Harmonic {
        k: f64,
    },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => v,
            Potential::Step { height } => {
                if x >= 0.0 {
                    height
                } else {
                    0.0
                }
            }
            Potential::Linear { slope } => slope * x,
            Potential::Harmonic { k } => 0.5 * k * x * x,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero | Potential::Constant(0.0))
    }
}

/// `c0 + c1·p + c2·p²`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticPoly {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl KineticPoly {
    pub fn eval(&self, p: f64) -> f64 {
        self.c0 + p * (self.c1 + p * self.c2)
    }
}

/// Operators whose symbols terminate at second order in p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperatorSpec {
    /// p²/2M ⊗ 1 + V(x)(V11|1⟩⟨1| + V00|0⟩⟨0|)
    Nonrelativistic { mass: f64, potential: Potential, v00: f64, v11: f64 },
    /// c·p·σ_x + Mc²·σ_z + V(x)·V_int, with ⟨0|V_int|1⟩ = v01
    Dirac { mass: f64, c: f64, charge: f64, potential: Potential, v00: f64, v11: f64, v01: C64 },
    /// Σ_k coeffs[k]·p^k ⊗ 1 + V(x)(V11|1⟩⟨1| + V00|0⟩⟨0|)
    PolynomialKinetic { coeffs: Vec<f64>, potential: Potential, v00: f64, v11: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonMeta {
    pub mass: f64,
    pub c: f64,
    pub charge: f64,
    pub v00: f64,
    pub v11: f64,
    pub v01: C64,
    pub relativistic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonSymbol {
    /// kinetic part per component, indexed by [`InternalPoint::index`]
    pub kinetic: [KineticPoly; 4],
    /// coefficient of V(x) per component
    pub coupling: [f64; 4],
    pub potential: Potential,
    pub meta: HamiltonMeta,
}

impl HamiltonSymbol {
    pub fn eval(&self, pt: InternalPoint, p: f64, x: f64) -> f64 {
        let a = pt.index();
        self.kinetic[a].eval(p) + self.coupling[a] * self.potential.eval(x)
    }

    /// Symbol values at fixed (p, x).
    pub fn at(&self, p: f64, x: f64) -> [f64; 4] {
        std::array::from_fn(|a| self.eval(InternalPoint::from_index(a), p, x))
    }

    pub fn sample(&self, grid: &PhaseGrid) -> SymbolField {
        SymbolField::from_fn(*grid, |pt, p, x| C64::from(self.eval(pt, p, x)))
    }

    pub fn has_potential(&self) -> bool {
        !self.potential.is_zero() && self.coupling.iter().any(|&v| v != 0.0)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive, got {v}")))
    }
}

/// Phase-space symbol of a Hamiltonian.
pub fn hamilton_symbol(spec: &OperatorSpec) -> Result<HamiltonSymbol> {
    match spec {
        OperatorSpec::Nonrelativistic { mass, potential, v00, v11 } => {
            check_positive("mass", *mass)?;
            let kin = KineticPoly { c0: 0.0, c1: 0.0, c2: 0.5 / mass };
            Ok(HamiltonSymbol {
                kinetic: [kin; 4],
                coupling: [*v00, *v00, *v11, *v11],
                potential: *potential,
                meta: HamiltonMeta {
                    mass: *mass,
                    c: f64::INFINITY,
                    charge: 1.0,
                    v00: *v00,
                    v11: *v11,
                    v01: C64::new(0.0, 0.0),
                    relativistic: false,
                },
            })
        }
        OperatorSpec::Dirac { mass, c: speed, charge, potential, v00, v11, v01 } => {
            check_positive("mass", *mass)?;
            check_positive("speed of light", *speed)?;
            let rest = mass * speed * speed;
            let k = |sign_p: f64, sign_m: f64| KineticPoly { c0: sign_m * rest, c1: sign_p * speed, c2: 0.0 };
            let x_plus = (c(1.0, 1.0) * v01).re;
            let x_minus = (c(1.0, -1.0) * v01).re;
            Ok(HamiltonSymbol {
                kinetic: [k(1.0, -1.0), k(-1.0, -1.0), k(1.0, 1.0), k(-1.0, 1.0)],
                coupling: [v00 + x_plus, v00 - x_plus, v11 + x_minus, v11 - x_minus],
                potential: *potential,
                meta: HamiltonMeta { mass: *mass, c: *speed, charge: *charge, v00: *v00, v11: *v11, v01: *v01, relativistic: true },
            })
        }
        OperatorSpec::PolynomialKinetic { coeffs, potential, v00, v11 } => {
            let degree = coeffs.iter().rposition(|&v| v != 0.0).unwrap_or(0);
            if degree > 2 {
                return Err(Error::unsupported(format!(
                    "kinetic polynomial of degree {degree}: only symbols up to p² have a terminating star expansion"
                )));
            }
            let get = |k: usize| coeffs.get(k).copied().unwrap_or(0.0);
            let kin = KineticPoly { c0: get(0), c1: get(1), c2: get(2) };
            Ok(HamiltonSymbol {
                kinetic: [kin; 4],
                coupling: [*v00, *v00, *v11, *v11],
                potential: *potential,
                meta: HamiltonMeta {
                    mass: if kin.c2 != 0.0 { 0.5 / kin.c2 } else { f64::INFINITY },
                    c: f64::INFINITY,
                    charge: 1.0,
                    v00: *v00,
                    v11: *v11,
                    v01: C64::new(0.0, 0.0),
                    relativistic: false,
                },
            })
        }
    }
}

/// Internal matrix coupled to V(x), ⟨0|V_int|1⟩ = v01.
pub fn internal_potential_matrix(v00: f64, v11: f64, v01: C64) -> Matrix2 {
    Matrix2::hermitian(v11, v00, v01.conj())
}

// ---------------------------------------------------------------------------
// Wigner functions of pure states

/// Wigner function of a pure state: exact for plane-wave pieces, sampled
/// for grid states.
#[derive(Debug, Clone, PartialEq)]
pub enum PureWigner {
    Distributional(DistributionalWigner),
    Sampled(WignerField),
}

/// W(p, x, m, n) = (1/4πħ) ∫ dξ e^{iξp/ħ} Ψ(x + ξ/2)† Ω(m,n) Ψ(x − ξ/2).
///
/// The piece representation yields the exact term list; the sampled
/// representation needs `grid` and must share its x lattice.
pub fn wigner_of_pure_state(state: &SpinorWaveState, grid: Option<&PhaseGrid>) -> Result<PureWigner> {
    match &state.repr {
        Representation::Pieces(pieces) => Ok(PureWigner::Distributional(wigner_of_pieces(pieces, state.hbar)?)),
        Representation::Sampled { .. } => {
            let grid = grid.ok_or_else(|| Error::arg("sampled states need a grid"))?;
            Ok(PureWigner::Sampled(wigner_sampled(state, grid)?))
        }
    }
}

/// Exact Wigner term list of a superposition of windowed plane waves.
///
/// For pieces a, b with windows (a1, a2), (b1, b2) the ξ-integral runs over
/// L < ξ < U with L = max(2(a1 − x), 2(x − b2)), U = min(2(a2 − x), 2(x − b1)),
/// non-empty for (a1 + b1)/2 < x < (a2 + b2)/2. Finite limits give a smooth
/// sinc-like term, one infinite limit gives a delta line plus a PV line, two
/// give a bare delta line.
pub fn wigner_of_pieces(pieces: &[PlaneWavePiece], hbar: f64) -> Result<DistributionalWigner> {
    if pieces.is_empty() {
        return Err(Error::arg("state has no plane-wave pieces"));
    }
    let mut terms = Vec::new();
    for (ia, a) in pieces.iter().enumerate() {
        for (ib, b) in pieces.iter().enumerate().skip(ia) {
            let role = if ia == ib { TermRole::Direct(ia) } else { TermRole::Interference(ia, ib) };
            let factor = if ia == ib { 0.5 } else { 1.0 };
            pair_terms(a, b, hbar, factor, role, &mut terms)?;
        }
    }
    DistributionalWigner::new(terms)
}

fn limit_lower(a1: f64, b2: f64) -> Option<Affine> {
    match (a1.is_finite(), b2.is_finite()) {
        (true, true) => Some(Affine::kinked(a1 - b2, 0.0, 2.0, 0.5 * (a1 + b2))),
        (false, true) => Some(Affine::linear(-2.0 * b2, 2.0)),
        (true, false) => Some(Affine::linear(2.0 * a1, -2.0)),
        (false, false) => None,
    }
}

fn limit_upper(a2: f64, b1: f64) -> Option<Affine> {
    match (a2.is_finite(), b1.is_finite()) {
        (true, true) => Some(Affine::kinked(a2 - b1, 0.0, -2.0, 0.5 * (a2 + b1))),
        (false, true) => Some(Affine::linear(-2.0 * b1, 2.0)),
        (true, false) => Some(Affine::linear(2.0 * a2, -2.0)),
        (false, false) => None,
    }
}

/// Re(w·e^{iΘ}) as oscillations, Θ = rate·p + phase.
fn re_w_exp(w: C64, rate: Affine, phase: Affine) -> [Oscillation; 2] {
    [Oscillation::new(w.re, Trig::Cos, rate, phase), Oscillation::new(-w.im, Trig::Sin, rate, phase)]
}

/// Im(w·e^{iΘ}) as oscillations.
fn im_w_exp(w: C64, rate: Affine, phase: Affine) -> [Oscillation; 2] {
    [Oscillation::new(w.re, Trig::Sin, rate, phase), Oscillation::new(w.im, Trig::Cos, rate, phase)]
}

fn pair_terms(a: &PlaneWavePiece, b: &PlaneWavePiece, hbar: f64, factor: f64, role: TermRole, out: &mut Vec<Term>) -> Result<()> {
    let (a1, a2) = (a.window.lo, a.window.hi);
    let (b1, b2) = (b.window.lo, b.window.hi);
    let lo = 0.5 * (a1 + b1);
    let hi = 0.5 * (a2 + b2);
    if !(lo < hi) {
        return Ok(());
    }
    let window = Window::new(lo, hi)?;
    let kbar = 0.5 * (a.momentum + b.momentum);
    let delta = b.momentum - a.momentum;
    // e^{iΔx/ħ}
    let beat = Affine::linear(0.0, delta / hbar);
    let lower = limit_lower(a1, b2);
    let upper = limit_upper(a2, b1);
    for pt in InternalPoint::ALL {
        let w = factor * discrete_quantizer(pt).sandwich(a.amplitude, b.amplitude);
        if w == C64::new(0.0, 0.0) {
            continue;
        }
        // Θ(ξ) = ξ(p − k̄)/ħ + Δx/ħ; for an affine limit ℓ(x) the rate is ℓ/ħ
        // and the phase −k̄ℓ/ħ + Δx/ħ
        let theta = |lim: &Affine| -> Result<(Affine, Affine)> {
            let rate = lim.scale(1.0 / hbar);
            let phase = lim.scale(-kbar / hbar).plus(&beat)?;
            Ok((rate, phase))
        };
        let inv_2pi = 1.0 / (2.0 * PI);
        let push = |out: &mut Vec<Term>, kind: TermKind| out.push(Term { point: pt, window, kind, role });
        match (lower, upper) {
            (Some(l), Some(u)) => {
                // (1/2π)[Im(w e^{iΘ(U)}) − Im(w e^{iΘ(L)})]/(p − k̄)
                let mut num = Waveform::zero();
                let (ru, phu) = theta(&u)?;
                let (rl, phl) = theta(&l)?;
                for o in im_w_exp(w, ru, phu) {
                    num.push(o.scaled(inv_2pi));
                }
                for o in im_w_exp(w, rl, phl) {
                    num.push(o.scaled(-inv_2pi));
                }
                if !num.is_zero() {
                    push(out, TermKind::Smooth { numerator: num, pole: Some(kbar) });
                }
            }
            (Some(l), None) => {
                // ½Re(w e^{iΔx/ħ}) δ(p − k̄) − (1/2π) Im(w e^{iΘ(L)}) vp 1/(p − k̄)
                delta_line(out, pt, window, role, kbar, w, beat, 0.5);
                let (rl, phl) = theta(&l)?;
                let env = Waveform(im_w_exp(w, rl, phl).iter().map(|o| o.scaled(-inv_2pi)).filter(|o| o.amp != 0.0).collect());
                if !env.is_zero() {
                    push(out, TermKind::PvLine { p0: kbar, envelope: env });
                }
            }
            (None, Some(u)) => {
                delta_line(out, pt, window, role, kbar, w, beat, 0.5);
                let (ru, phu) = theta(&u)?;
                let env = Waveform(im_w_exp(w, ru, phu).iter().map(|o| o.scaled(inv_2pi)).filter(|o| o.amp != 0.0).collect());
                if !env.is_zero() {
                    push(out, TermKind::PvLine { p0: kbar, envelope: env });
                }
            }
            (None, None) => delta_line(out, pt, window, role, kbar, w, beat, 1.0),
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn delta_line(out: &mut Vec<Term>, pt: InternalPoint, window: Window, role: TermRole, p0: f64, w: C64, beat: Affine, scale: f64) {
    let zero_rate = Affine::constant(0.0);
    let weight = Waveform(re_w_exp(w * scale, zero_rate, beat).into_iter().filter(|o| o.amp != 0.0).collect());
    if !weight.is_zero() {
        out.push(Term { point: pt, window, kind: TermKind::DeltaLine { p0, weight }, role });
    }
}

fn sampled_parts(state: &SpinorWaveState, grid: &PhaseGrid) -> Result<(Vec<C64>, Vec<C64>)> {
    match &state.repr {
        Representation::Sampled { x_min, x_max, upper, lower } => {
            let same = *x_min == grid.x_min && *x_max == grid.x_max && upper.len() == grid.n_x;
            if !same {
                return Err(Error::arg("sampled state and grid use different x lattices"));
            }
            Ok((upper.clone(), lower.clone()))
        }
        Representation::Pieces(_) => Err(Error::arg("expected a sampled state")),
    }
}

/// Cross-Wigner symbol (1/4πħ) ∫ dξ e^{iξp/ħ} Ψ_a(x + ξ/2)† Ω Ψ_b(x − ξ/2) of
/// two sampled states on the grid's x lattice. Odd multiples of Δx/2 use
/// spectrally interpolated midpoints, so the states must decay at the edges.
pub fn cross_wigner_sampled(a: &SpinorWaveState, b: &SpinorWaveState, grid: &PhaseGrid) -> Result<SymbolField> {
    grid.validate()?;
    if a.hbar != grid.hbar || b.hbar != grid.hbar {
        return Err(Error::arg("state and grid disagree on hbar"));
    }
    let (au, al) = sampled_parts(a, grid)?;
    let (bu, bl) = sampled_parts(b, grid)?;
    let fine_a = [refine_by_two(&au), refine_by_two(&al)];
    let fine_b = [refine_by_two(&bu), refine_by_two(&bl)];
    let n = grid.n_x;
    let last = 2 * n - 2;
    let dmax = last as i64;
    let dx = grid.dx();
    let pref = dx / (4.0 * PI * grid.hbar);
    let omegas: [Matrix2; 4] = std::array::from_fn(|a| discrete_quantizer(InternalPoint::from_index(a)));
    let ps = grid.ps();
    // phase[k][d + dmax] = e^{i d Δx p_k/ħ}
    let width = 2 * last + 1;
    let phases: Vec<C64> = (0..grid.n_p)
        .flat_map(|k| {
            let base = C64::from_polar(1.0, dx * ps[k] / grid.hbar);
            let start = base.powi(-(dmax as i32));
            (0..width).scan(start, move |ph, _| {
                let v = *ph;
                *ph *= base;
                Some(v)
            })
        })
        .collect();
    let columns: Vec<[Vec<C64>; 4]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let centre = 2 * i;
            let reach = centre.min(last - centre);
            let mut coef: [Vec<C64>; 4] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); 2 * reach + 1]);
            for (j, d) in (-(reach as i64)..=reach as i64).enumerate() {
                let plus = (centre as i64 + d) as usize;
                let minus = (centre as i64 - d) as usize;
                let u = [fine_a[0][plus], fine_a[1][plus]];
                let v = [fine_b[0][minus], fine_b[1][minus]];
                for (slot, om) in coef.iter_mut().zip(&omegas) {
                    slot[j] = om.sandwich(u, v);
                }
            }
            let mut out: [Vec<C64>; 4] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); grid.n_p]);
            let off = (dmax - reach as i64) as usize;
            for k in 0..grid.n_p {
                let row = &phases[k * width + off..k * width + off + 2 * reach + 1];
                for (o, cf) in out.iter_mut().zip(&coef) {
                    let s: C64 = row.iter().zip(cf).map(|(p, c)| p * c).sum();
                    o[k] = s * pref;
                }
            }
            out
        })
        .collect();
    let mut field = SymbolField::zeros(*grid);
    for (i, col) in columns.iter().enumerate() {
        for a in 0..4 {
            for k in 0..grid.n_p {
                field.values[a][grid.index(k, i)] = col[a][k];
            }
        }
    }
    Ok(field)
}

/// Wigner function of a sampled state on a grid sharing its x lattice.
pub fn wigner_sampled(state: &SpinorWaveState, grid: &PhaseGrid) -> Result<WignerField> {
    Ok(cross_wigner_sampled(state, state, grid)?.real_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwinger_matrices() {
        let (v, r) = schwinger_pair();
        assert_eq!(v, Matrix2::from_real([[-1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(r, Matrix2::from_real([[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(r * r, Matrix2::identity());
    }

    #[test]
    fn displacements() {
        assert_eq!(displacement_d(0, 0), Matrix2::identity());
        // i|0⟩⟨1| − i|1⟩⟨0|
        let d11 = Matrix2::new([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        assert_eq!(displacement_d(1, 1), d11);
        assert_eq!(displacement_d(2, 0), Matrix2::identity());
        assert_eq!(displacement_d(1, 0), Matrix2::sigma_x());
        assert_eq!(displacement_d(0, 1), -Matrix2::sigma_z());
        for k in -3..4 {
            for l in -3..4 {
                assert!(displacement_d(k, l).is_unitary(1e-15));
            }
        }
    }

    #[test]
    fn quantizer_paths_agree() {
        for pt in InternalPoint::ALL {
            let om = discrete_quantizer(pt);
            assert_eq!(om, discrete_quantizer_from_sum(pt));
            assert!(om.is_hermitian(0.0));
            assert_eq!(om.trace(), c(1.0, 0.0));
        }
        let sum = InternalPoint::ALL.iter().fold(Matrix2::zero(), |acc, &pt| acc + discrete_quantizer(pt));
        assert_eq!(sum, 2.0 * Matrix2::identity());
        let frame = DiscreteFrame::new();
        assert_eq!(frame.d[1][1], displacement_d(1, 1));
    }

    #[test]
    fn symbols_of_basic_matrices() {
        assert_eq!(matrix_to_symbol(&Matrix2::identity()), [c(1.0, 0.0); 4]);
        assert_eq!(hermitian_symbol(&Matrix2::proj_one()).unwrap(), [0.0, 0.0, 1.0, 1.0]);
        assert_eq!(hermitian_symbol(&Matrix2::sigma_x()).unwrap(), [1.0, -1.0, 1.0, -1.0]);
        assert_eq!(hermitian_symbol(&Matrix2::sigma_z()).unwrap(), [-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(real_symbol_to_matrix(&[1.0, -1.0, 1.0, -1.0]), Matrix2::sigma_x());
        assert_eq!(real_symbol_to_matrix(&[1.0; 4]), Matrix2::identity());
        let not_hermitian = Matrix2::new([[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        assert!(hermitian_symbol(&not_hermitian).is_err());
    }

    #[test]
    fn hamilton_symbols() {
        let free = hamilton_symbol(&OperatorSpec::Dirac {
            mass: 1.0,
            c: 1.0,
            charge: 1.0,
            potential: Potential::Zero,
            v00: 0.0,
            v11: 0.0,
            v01: c(0.0, 0.0),
        })
        .unwrap();
        assert_eq!(free.at(0.5, 0.0), [0.5 - 1.0, -0.5 - 1.0, 0.5 + 1.0, -0.5 + 1.0]);
        let nonrel = hamilton_symbol(&OperatorSpec::Nonrelativistic { mass: 2.0, potential: Potential::Zero, v00: 1.0, v11: 1.0 }).unwrap();
        assert_eq!(nonrel.at(2.0, 3.0), [1.0; 4]);
        let quartic =
            OperatorSpec::PolynomialKinetic { coeffs: vec![0.0, 0.0, 0.5, 0.0, 0.1], potential: Potential::Zero, v00: 1.0, v11: 1.0 };
        assert!(matches!(hamilton_symbol(&quartic), Err(Error::Unsupported(_))));
    }

    #[test]
    fn identity_and_position_kernels() {
        let g = PhaseGrid::new((-3.0, 3.0), 31, (-2.0, 2.0), 9).unwrap();
        let n = g.n_x;
        let dx = g.dx();
        let mut ident = vec![C64::new(0.0, 0.0); n * n];
        let mut pos = ident.clone();
        for i in 0..n {
            ident[i * n + i] = C64::from(1.0 / dx);
            pos[i * n + i] = C64::from(g.x(i) / dx);
        }
        let f = weyl_symbol_of_kernel(&ident, &g).unwrap();
        assert!(f.iter().all(|v| (v - C64::from(1.0)).norm() < 1e-13));
        let f = weyl_symbol_of_kernel(&pos, &g).unwrap();
        for k in 0..g.n_p {
            for i in 0..n {
                assert!((f[g.index(k, i)] - C64::from(g.x(i))).norm() < 1e-12);
            }
        }
        assert!(weyl_symbol_of_kernel(&ident[..n], &g).is_err());
    }
}
