//! Densities, currents and continuity checks.
//!
//! Moments of distributional Wigner functions are computed with the damping
//! factor e^{−α|p|} in closed form and extrapolated to α → 0⁺.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::distribution::{DistributionalWigner, TermKind};
use crate::error::{Error, Result};
use crate::expr::{Trig, Waveform};
use crate::field::{SymbolField, WignerField};
use crate::grid::InternalPoint;
use crate::special::pv_laplace;
use crate::spectral::{derivative, FftPair};
use crate::star::Trajectory;
use crate::state::SpinorWaveState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentSample {
    pub x: f64,
    pub j: f64,
    pub side: Option<Side>,
}

/// How the α → 0⁺ limit of damped moments is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularizationPolicy {
    /// strictly decreasing, positive
    pub alpha_sequence: Vec<f64>,
    /// number of Richardson passes (ratio-2 sequences assumed)
    pub richardson_order: usize,
    /// the last two extrapolated estimates must agree within
    /// `cauchy_tolerance · max(1, |estimate|)`
    pub cauchy_tolerance: f64,
}

impl Default for RegularizationPolicy {
    fn default() -> Self {
        Self { alpha_sequence: (0..=12).map(|k| 0.1 * 0.5f64.powi(k)).collect(), richardson_order: 3, cauchy_tolerance: 1e-9 }
    }
}

impl RegularizationPolicy {
    pub fn validate(&self) -> Result<()> {
        let s = &self.alpha_sequence;
        if s.len() < self.richardson_order + 2 {
            return Err(Error::arg("alpha sequence too short for the requested extrapolation order"));
        }
        if s.iter().any(|a| !(*a > 0.0 && a.is_finite())) || s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::arg("alpha sequence must be positive and strictly decreasing"));
        }
        if !(self.cauchy_tolerance > 0.0) {
            return Err(Error::arg("cauchy tolerance must be positive"));
        }
        Ok(())
    }
}

/// Which current formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurrentMode {
    Nonrel { mass: f64 },
    Dirac { mass: f64, q: f64, c: f64 },
}

const MAX_ORDER: u32 = 3;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// ∫ p^k e^{−α|p|} e^{iap} dp
fn damped_power(k: u32, alpha: f64, a: f64) -> C64 {
    let minus = C64::new(alpha, -a).powi(-(k as i32) - 1);
    let plus = C64::new(alpha, a).powi(-(k as i32) - 1);
    let sgn = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    factorial(k) * (minus + sgn * plus)
}

/// PV ∫ p^n e^{−α|p|} e^{iap}/(p − p0) dp
fn damped_pole(n: u32, alpha: f64, a: f64, p0: f64) -> C64 {
    let j = if p0 == 0.0 {
        C64::new(0.0, 2.0 * a.atan2(alpha))
    } else {
        pv_laplace(C64::new(alpha, -a), p0) - pv_laplace(C64::new(alpha, a), -p0)
    };
    let mut out = p0.powi(n as i32) * j;
    for k in 0..n {
        out += p0.powi((n - 1 - k) as i32) * damped_power(k, alpha, a);
    }
    out
}

/// amp·trig(a p + b) = amp·Re or Im of e^{ib}·e^{iap}
fn project(amp: f64, trig: Trig, b: f64, v: C64) -> f64 {
    let z = C64::from_polar(1.0, b) * v;
    amp * match trig {
        Trig::Sin => z.im,
        Trig::Cos => z.re,
    }
}

fn waveform_damped(w: &Waveform, x: f64, n: u32, alpha: f64, pole: Option<f64>) -> f64 {
    w.0.iter()
        .map(|o| {
            let (a, b) = (o.rate.eval(x), o.phase.eval(x));
            let v = match pole {
                Some(p0) => damped_pole(n, alpha, a, p0),
                None => damped_power(n, alpha, a),
            };
            project(o.amp, o.trig, b, v)
        })
        .sum()
}

/// ∫ pⁿ e^{−α|p|} W(p, x) dp summed over the selected terms, at fixed α.
pub fn damped_moment(dw: &DistributionalWigner, n: u32, x: f64, alpha: f64) -> f64 {
    dw.terms
        .iter()
        .filter(|t| t.window.contains(x))
        .map(|t| match &t.kind {
            TermKind::DeltaLine { p0, weight } => weight.eval(*p0, x) * p0.powi(n as i32) * (-alpha * p0.abs()).exp(),
            TermKind::PvLine { p0, envelope } => waveform_damped(envelope, x, n, alpha, Some(*p0)),
            TermKind::Smooth { numerator, pole } => waveform_damped(numerator, x, n, alpha, *pole),
        })
        .sum()
}

fn check_order(n: u32) -> Result<()> {
    if n > MAX_ORDER {
        Err(Error::unsupported(format!("moments above order {MAX_ORDER} are not supported (got {n})")))
    } else {
        Ok(())
    }
}

/// Richardson extrapolation to α → 0 of estimates on a halving α sequence;
/// returns the final value and the last column.
fn richardson(values: &[f64], order: usize) -> Vec<f64> {
    let mut col = values.to_vec();
    for j in 1..=order {
        let f = 2f64.powi(j as i32);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    col
}

/// ∫ pⁿ W(p, x) dp as the α → 0⁺ limit of the damped moment. Delta lines
/// contribute exactly; the rest is extrapolated per `policy`.
pub fn regularized_moment(dw: &DistributionalWigner, n: u32, x: f64, policy: &RegularizationPolicy) -> Result<f64> {
    check_order(n)?;
    policy.validate()?;
    let mut exact = 0.0;
    let mut rest = DistributionalWigner::empty();
    for t in dw.terms.iter().filter(|t| t.window.contains(x)) {
        match &t.kind {
            TermKind::DeltaLine { p0, weight } => exact += weight.eval(*p0, x) * p0.powi(n as i32),
            _ => rest.terms.push(t.clone()),
        }
    }
    if rest.is_empty() {
        return Ok(exact);
    }
    let raw: Vec<f64> = policy.alpha_sequence.iter().map(|&a| damped_moment(&rest, n, x, a)).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("damped moment is not finite", raw));
    }
    let col = richardson(&raw, policy.richardson_order);
    let (last, prev) = (col[col.len() - 1], col[col.len() - 2]);
    if (last - prev).abs() > policy.cauchy_tolerance * last.abs().max(1.0) {
        return Err(Error::numeric(format!("α-extrapolation did not settle at x = {x} (order {n})"), col));
    }
    Ok(exact + last)
}

/// The α → 0⁺ limit taken analytically: PV ∫ e^{iap}/(p − p0) dp = iπ·sgn(a)·e^{iap0}
/// and all polynomial remainders vanish for a ≠ 0. Oscillations with a = 0
/// must cancel within each term for n ≥ 1.
pub fn exact_moment(dw: &DistributionalWigner, n: u32, x: f64) -> Result<f64> {
    check_order(n)?;
    let mut total = 0.0;
    for t in dw.terms.iter().filter(|t| t.window.contains(x)) {
        let (w, pole) = match &t.kind {
            TermKind::DeltaLine { p0, weight } => {
                total += weight.eval(*p0, x) * p0.powi(n as i32);
                continue;
            }
            TermKind::PvLine { p0, envelope } => (envelope, Some(*p0)),
            TermKind::Smooth { numerator, pole } => (numerator, *pole),
        };
        let mut flat = 0.0;
        let mut scale = 0.0f64;
        for o in &w.0 {
            let a = o.rate.eval(x);
            scale = scale.max(o.amp.abs());
            if a == 0.0 {
                flat += o.eval(0.0, x);
                continue;
            }
            if let Some(p0) = pole {
                let v = C64::new(0.0, PI * a.signum()) * C64::from_polar(1.0, a * p0) * p0.powi(n as i32);
                total += project(o.amp, o.trig, o.phase.eval(x), v);
            }
        }
        if flat.abs() > 1e-14 * scale.max(1.0) && (n >= 1 || pole.is_none()) {
            return Err(Error::domain(format!("moment of order {n} diverges at x = {x}")));
        }
    }
    Ok(total)
}

/// Borrowed Wigner data of either representation.
#[derive(Debug, Clone, Copy)]
pub enum WignerRef<'a> {
    Grid(&'a WignerField),
    Exact(&'a DistributionalWigner, &'a RegularizationPolicy),
}

impl<'a> From<&'a WignerField> for WignerRef<'a> {
    fn from(w: &'a WignerField) -> Self {
        WignerRef::Grid(w)
    }
}

fn interpolate(profile: &[f64], t: f64) -> f64 {
    let i = (t.floor() as usize).min(profile.len() - 1);
    if i + 1 >= profile.len() {
        return profile[i];
    }
    let f = t - i as f64;
    if f == 0.0 {
        profile[i]
    } else {
        (1.0 - f) * profile[i] + f * profile[i + 1]
    }
}

/// ∫ pⁿ W(p, x, pt) dp
pub fn component_moment(w: WignerRef<'_>, pt: InternalPoint, n: u32, x: f64) -> Result<f64> {
    match w {
        WignerRef::Grid(f) => {
            let t = f.grid.locate_x(x).ok_or_else(|| Error::domain(format!("x = {x} is outside the grid")))?;
            Ok(interpolate(&f.moment_profile(pt, n), t))
        }
        WignerRef::Exact(dw, policy) => regularized_moment(&dw.component(pt), n, x, policy),
    }
}

fn total_moment(w: WignerRef<'_>, n: u32, x: f64) -> Result<f64> {
    match w {
        WignerRef::Grid(f) => {
            let t = f.grid.locate_x(x).ok_or_else(|| Error::domain(format!("x = {x} is outside the grid")))?;
            Ok(interpolate(&f.total_moment_profile(n), t))
        }
        WignerRef::Exact(dw, policy) => regularized_moment(dw, n, x, policy),
    }
}

/// ρ(x) = Σ_{m,n} ∫ W dp
pub fn spatial_density(w: WignerRef<'_>, x: f64) -> Result<f64> {
    total_moment(w, 0, x)
}

/// j(x) = (1/M) Σ_{m,n} ∫ p·W dp
pub fn current_nonrel(w: WignerRef<'_>, mass: f64, x: f64) -> Result<f64> {
    Ok(total_moment(w, 1, x)? / mass)
}

/// j(x) = qc ∫ (W(0,0) + W(0,1) − W(1,0) − W(1,1)) dp
pub fn current_dirac(w: WignerRef<'_>, q: f64, c: f64, x: f64) -> Result<f64> {
    let mut s = 0.0;
    for pt in InternalPoint::ALL {
        let sign = if pt.m == 0 { 1.0 } else { -1.0 };
        s += sign * component_moment(w, pt, 0, x)?;
    }
    Ok(q * c * s)
}

pub fn current(w: WignerRef<'_>, mode: CurrentMode, x: f64) -> Result<f64> {
    match mode {
        CurrentMode::Nonrel { mass } => current_nonrel(w, mass, x),
        CurrentMode::Dirac { q, c, .. } => current_dirac(w, q, c, x),
    }
}

/// Current of a piecewise plane-wave state straight from the wave function:
/// (ħ/M)·Im(Ψ†∂Ψ) or qc·2·Re(Ψ1·conj Ψ0).
pub fn oracle_current_wavefunction(state: &SpinorWaveState, x: f64, mode: CurrentMode) -> Result<f64> {
    let psi = state.value(x)?;
    match mode {
        CurrentMode::Nonrel { mass } => {
            let d = state.derivative(x)?;
            Ok(state.hbar / mass * (psi[0].conj() * d[0] + psi[1].conj() * d[1]).im)
        }
        CurrentMode::Dirac { q, c, .. } => Ok(q * c * 2.0 * (psi[0] * psi[1].conj()).re),
    }
}

// ---------------------------------------------------------------------------
// time-dependent continuity

/// ρ and j profiles over x for one frame of a trajectory.
fn frame_profiles(frame: &SymbolField, traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    let w = frame.real_part();
    let rho = w.total_moment_profile(0);
    let meta = &traj.hamiltonian.meta;
    let j = if meta.relativistic {
        let mut j = vec![0.0; w.grid.n_x];
        for pt in InternalPoint::ALL {
            let sign = if pt.m == 0 { 1.0 } else { -1.0 };
            for (o, v) in j.iter_mut().zip(w.moment_profile(pt, 0)) {
                *o += sign * meta.charge * meta.c * v;
            }
        }
        j
    } else {
        // mixed kinetic terms: the velocity is ∂H/∂p = c1 + 2c2·p
        let k = traj.hamiltonian.kinetic[0];
        let j0 = w.total_moment_profile(0);
        let j1 = w.total_moment_profile(1);
        j0.iter().zip(&j1).map(|(a, b)| k.c1 * a + 2.0 * k.c2 * b).collect()
    };
    (rho, j)
}

fn time_index(traj: &Trajectory, t: f64) -> Result<usize> {
    let times = &traj.times;
    if times.len() < 3 {
        return Err(Error::arg("continuity residual needs at least three time samples"));
    }
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::arg("trajectory samples are not uniformly spaced"));
    }
    let idx = ((t - times[0]) / h).round();
    if idx < 1.0 || idx as usize + 1 >= times.len() || ((times[0] + idx * h) - t).abs() > 1e-9 * h.max(t.abs()) {
        return Err(Error::arg(format!("t = {t} is not an interior sample time")));
    }
    Ok(idx as usize)
}

/// ∂ρ/∂t + ∂j/∂x over the whole x lattice at sample time t: fourth-order
/// central differences in time where two neighbours exist on each side
/// (second order otherwise), spectral derivative in x.
pub fn continuity_residual_profile(traj: &Trajectory, t: f64) -> Result<Vec<f64>> {
    let i = time_index(traj, t)?;
    let h = traj.times[1] - traj.times[0];
    let rho_at = |k: usize| frame_profiles(&traj.frames[k], traj).0;
    let drho: Vec<f64> = if i >= 2 && i + 2 < traj.times.len() {
        let (m2, m1, p1, p2) = (rho_at(i - 2), rho_at(i - 1), rho_at(i + 1), rho_at(i + 2));
        (0..m1.len()).map(|k| (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h)).collect()
    } else {
        let (m1, p1) = (rho_at(i - 1), rho_at(i + 1));
        (0..m1.len()).map(|k| (p1[k] - m1[k]) / (2.0 * h)).collect()
    };
    let (_, j) = frame_profiles(&traj.frames[i], traj);
    let grid = traj.frames[i].grid;
    let mut dj: Vec<C64> = j.iter().map(|&v| C64::from(v)).collect();
    derivative(&FftPair::new(grid.n_x), grid.dx(), &mut dj, 1);
    Ok(drho.iter().zip(&dj).map(|(a, b)| a + b.re).collect())
}

/// Continuity residual at (x, t); x is interpolated between lattice columns.
pub fn continuity_residual(traj: &Trajectory, x: f64, t: f64) -> Result<f64> {
    let profile = continuity_residual_profile(traj, t)?;
    let grid = traj.frames[0].grid;
    let s = grid.locate_x(x).ok_or_else(|| Error::domain(format!("x = {x} is outside the grid")))?;
    Ok(interpolate(&profile, s))
}

/// Current profile of one trajectory frame.
pub fn frame_current(traj: &Trajectory, index: usize) -> Result<Vec<f64>> {
    let frame = traj.frames.get(index).ok_or_else(|| Error::arg("frame index out of range"))?;
    Ok(frame_profiles(frame, traj).1)
}

// ---------------------------------------------------------------------------
// beam decomposition

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamRow {
    pub g: f64,
    pub mean_abs_p: f64,
    pub j_inc: f64,
    pub j_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamDecomposition {
    pub j_inc: f64,
    pub j_ref: f64,
    /// total current used for the split
    pub j: f64,
    pub table: Vec<BeamRow>,
}

/// ∫_lo^hi e^{iκx} dx
fn phase_integral(kappa: f64, lo: f64, hi: f64) -> C64 {
    if kappa == 0.0 {
        C64::from(hi - lo)
    } else {
        (C64::from_polar(1.0, kappa * hi) - C64::from_polar(1.0, kappa * lo)) / C64::new(0.0, kappa)
    }
}

/// Split the current of a stationary scattering state into incident and
/// reflected parts on x < x_L. For each G the mean
/// ⟨|p|⟩_G = (1/G) ∫_{−G}^{x_L} Re Ψ†(x)·|p̂|Ψ(x) dx is evaluated in closed form
/// (|p̂| is diagonal on the plane-wave pieces), then
/// j_inc,ref = ±v(⟨|p|⟩)/2 + j/2, and both are extrapolated linearly in 1/G
/// from the two largest G.
pub fn beam_decompose(state: &SpinorWaveState, x_l: f64, g_values: &[f64], mode: CurrentMode) -> Result<BeamDecomposition> {
    let pieces = state.as_pieces().ok_or_else(|| Error::unsupported("beam decomposition needs plane-wave pieces"))?;
    let left: Vec<_> = pieces.iter().filter(|pc| pc.window.lo < x_l).collect();
    if left.is_empty() || !left.iter().any(|pc| pc.window.lo == f64::NEG_INFINITY) {
        return Err(Error::unsupported("no plane-wave representation extending to x → −∞"));
    }
    if g_values.len() < 2 || g_values.iter().any(|g| !(*g > 0.0)) || g_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("need at least two positive, increasing G values"));
    }
    let hbar = state.hbar;
    let probe = x_l - 1.0;
    let j = oracle_current_wavefunction(state, probe, mode)?;
    // |p| times density → current
    let speed = |mean: f64| -> f64 {
        match mode {
            CurrentMode::Nonrel { mass } => mean / mass,
            CurrentMode::Dirac { mass, q, c } => {
                let p = left[0].momentum.abs();
                let e = (c * c * p * p + mass * mass * c.powi(4)).sqrt();
                q * c * c * mean / e
            }
        }
    };
    let mut table = Vec::with_capacity(g_values.len());
    for &g in g_values {
        let lo_g = x_l - g;
        let mut acc = C64::new(0.0, 0.0);
        for a in &left {
            for b in &left {
                let lo = lo_g.max(a.window.lo).max(b.window.lo);
                let hi = x_l.min(a.window.hi).min(b.window.hi);
                if !(hi > lo) {
                    continue;
                }
                let amp = a.amplitude[0].conj() * b.amplitude[0] + a.amplitude[1].conj() * b.amplitude[1];
                acc += amp * b.momentum.abs() * phase_integral((b.momentum - a.momentum) / hbar, lo, hi);
            }
        }
        let mean = acc.re / g;
        let v = speed(mean);
        table.push(BeamRow { g, mean_abs_p: mean, j_inc: 0.5 * v + 0.5 * j, j_ref: -0.5 * v + 0.5 * j });
    }
    let (r1, r2) = (table[table.len() - 2], table[table.len() - 1]);
    let extrapolate = |e1: f64, e2: f64| (r2.g * e2 - r1.g * e1) / (r2.g - r1.g);
    Ok(BeamDecomposition { j_inc: extrapolate(r1.j_inc, r2.j_inc), j_ref: extrapolate(r1.j_ref, r2.j_ref), j, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{Term, TermRole};
    use crate::expr::{Affine, Oscillation, Window};

    fn pv_term(amp: f64, trig: Trig, rate: f64, phase: f64, p0: f64) -> DistributionalWigner {
        DistributionalWigner::new(vec![Term {
            point: InternalPoint::new(0, 0).unwrap(),
            window: Window::full_line(),
            kind: TermKind::PvLine {
                p0,
                envelope: Waveform::single(Oscillation::new(amp, trig, Affine::constant(rate), Affine::constant(phase))),
            },
            role: TermRole::Direct(0),
        }])
        .unwrap()
    }

    #[test]
    fn damped_power_matches_direct_sum() {
        // ∫ p e^{−α|p|} cos(ap) dp = 0 by parity, ∫ e^{−α|p|} cos(ap) dp = 2α/(α² + a²)
        let v = damped_power(0, 0.3, 1.7);
        assert!((v.re - 0.6 / (0.09 + 1.7 * 1.7)).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
        let v1 = damped_power(1, 0.3, 1.7);
        assert!(v1.re.abs() < 1e-15);
    }

    #[test]
    fn extrapolated_pv_moment_matches_exact_limit() {
        // sin(2(p − p0))/(p − p0) integrates to π for any p0
        for n in 0..=3 {
            let dw = pv_term(1.0 / PI, Trig::Sin, 2.0, -2.0 * 0.7, 0.7);
            let exact = exact_moment(&dw, n, 0.3).unwrap();
            assert!((exact - 0.7f64.powi(n as i32)).abs() < 1e-14);
            let reg = regularized_moment(&dw, n, 0.3, &RegularizationPolicy::default()).unwrap();
            assert!((reg - exact).abs() < 1e-10, "order {n}: {reg} vs {exact}");
        }
    }

    #[test]
    fn order_above_three_is_rejected() {
        let dw = pv_term(1.0, Trig::Sin, 1.0, 0.0, 0.5);
        assert!(matches!(regularized_moment(&dw, 4, 0.0, &RegularizationPolicy::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn flat_envelope_first_moment_diverges() {
        let dw = pv_term(1.0, Trig::Cos, 0.0, 0.0, 0.5);
        assert!(exact_moment(&dw, 1, 0.0).is_err());
        assert!(matches!(regularized_moment(&dw, 1, 0.0, &RegularizationPolicy::default()), Err(Error::Numeric { .. })));
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let vals: Vec<f64> = (0..6).map(|k| 1.0 + 0.5f64.powi(k) - 0.3 * 0.25f64.powi(k) + 0.1 * 0.125f64.powi(k)).collect();
        let col = richardson(&vals, 3);
        assert!((col.last().unwrap() - 1.0).abs() < 1e-14);
    }
}
