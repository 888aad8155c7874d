//! Closed-form stationary states: free eigenstates and step scattering.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{DistributionalWigner, Term, TermKind, TermRole};
use crate::error::{Error, Result};
use crate::expr::{Waveform, Window};
use crate::grid::InternalPoint;
use crate::quantizer::{discrete_star_coefficients, wigner_of_pieces};
use crate::star::discrete_brace;
use crate::state::{PlaneWavePiece, SpinorWaveState};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nonrel,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub energy: f64,
    pub mass: f64,
    /// speed of light (Dirac mode)
    pub c: f64,
    pub v0: f64,
    pub q: f64,
    /// (A1, A0), unit norm (nonrelativistic mode)
    pub spin: [C64; 2],
    pub mode: Mode,
    pub hbar: f64,
}

impl ScatterConfig {
    pub fn nonrel(energy: f64, v0: f64, mass: f64) -> Self {
        Self { energy, mass, c: 1.0, v0, q: 1.0, spin: [C64::new(1.0, 0.0), ZERO], mode: Mode::Nonrel, hbar: 1.0 }
    }

    pub fn dirac(energy: f64, v0: f64, mass: f64, c: f64, q: f64) -> Self {
        Self { energy, mass, c, v0, q, spin: [C64::new(1.0, 0.0), ZERO], mode: Mode::Dirac, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Nonrel,
    Klein,
    AboveBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterReport {
    pub p: f64,
    pub p_tilde: f64,
    pub j_inc: f64,
    pub j_ref: f64,
    pub j_trans: f64,
    pub t: f64,
    pub r: f64,
    pub n_trans: Option<f64>,
    pub n_ref: Option<f64>,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub report: ScatterReport,
    pub state: SpinorWaveState,
    pub wigner: DistributionalWigner,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive and finite, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// free eigenstates

/// Internal state of a free nonrelativistic eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
    /// C_mn in component order (0,0), (1,0), (0,1), (1,1)
    Mixture([f64; 4]),
}

impl Spin {
    pub fn coefficients(&self) -> Result<[f64; 4]> {
        let c = match self {
            Spin::Up => [0.0, 0.0, 0.5, 0.5],
            Spin::Down => [0.5, 0.5, 0.0, 0.0],
            Spin::Mixture(c) => *c,
        };
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("mixture coefficients must be finite"));
        }
        if (c.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::arg("mixture coefficients must sum to 1"));
        }
        // marginals over m at fixed n and over n at fixed m
        let pairs = [(0, 1), (2, 3), (0, 2), (1, 3)];
        if let Some((a, b)) = pairs.iter().find(|(a, b)| c[*a] + c[*b] < -1e-15) {
            return Err(Error::arg(format!("coefficients {a} and {b} have a negative marginal sum")));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Particle,
    Antiparticle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeEigenstate {
    pub wigner: DistributionalWigner,
    pub energy: f64,
    pub current: f64,
    /// delta-line weights per component, (2πħ)⁻¹ or (4πħ)⁻¹ included
    pub weights: [f64; 4],
}

fn delta_lines(p0: f64, weights: &[f64; 4]) -> Result<DistributionalWigner> {
    let terms = InternalPoint::ALL
        .iter()
        .filter(|pt| weights[pt.index()] != 0.0)
        .map(|&pt| Term {
            point: pt,
            window: Window::full_line(),
            kind: TermKind::DeltaLine { p0, weight: Waveform::constant(weights[pt.index()]) },
            role: TermRole::Direct(0),
        })
        .collect();
    DistributionalWigner::new(terms)
}

/// Wigner function C_mn·(2πħ)⁻¹·δ(p − 𝚙) of a free plane wave with internal
/// mixture C, and its current (2πħ)⁻¹𝚙/M.
pub fn free_eigenstate_nonrel(p: f64, spin: Spin, mass: f64, hbar: f64) -> Result<FreeEigenstate> {
    positive("mass", mass)?;
    positive("hbar", hbar)?;
    if !p.is_finite() {
        return Err(Error::arg("momentum must be finite"));
    }
    let c = spin.coefficients()?;
    let norm = 1.0 / (2.0 * PI * hbar);
    let weights = c.map(|v| v * norm);
    Ok(FreeEigenstate { wigner: delta_lines(p, &weights)?, energy: p * p / (2.0 * mass), current: norm * p / mass, weights })
}

/// Spinor direction (u, d) ∝ (Ψ1, Ψ0) of a free Dirac eigenstate. For the
/// particle the equivalent form (E + Mc², c𝚙) stays regular at 𝚙 = 0.
fn dirac_spinor(p: f64, sign: Sign, mass: f64, c: f64) -> (f64, f64, f64) {
    let rest = mass * c * c;
    let e = (c * c * p * p + rest * rest).sqrt();
    match sign {
        Sign::Particle => (e + rest, c * p, e),
        Sign::Antiparticle => (c * p, -(e + rest), -e),
    }
}

/// Rational weights of the four components in terms of u = c𝚙 and
/// d = E± − Mc², without the common 1/(4πħ).
fn dirac_weights(u: f64, d: f64) -> [f64; 4] {
    let s = u * u + d * d;
    [d * (u + d) / s, d * (d - u) / s, u * (u + d) / s, u * (u - d) / s]
}

/// Free 1-D Dirac eigenstate of momentum 𝚙: four delta lines whose weights
/// sum to 2/(4πħ), and the current ±qc²𝚙/(2πħ|E|).
pub fn free_eigenstate_dirac(p: f64, sign: Sign, mass: f64, c: f64, q: f64, hbar: f64) -> Result<FreeEigenstate> {
    positive("mass", mass)?;
    positive("speed of light", c)?;
    positive("hbar", hbar)?;
    if !p.is_finite() {
        return Err(Error::arg("momentum must be finite"));
    }
    let (u, d, e) = dirac_spinor(p, sign, mass, c);
    let norm = 1.0 / (4.0 * PI * hbar);
    let weights = dirac_weights(u, d).map(|w| w * norm);
    let current = q * c * c * p / (2.0 * PI * hbar * e);
    Ok(FreeEigenstate { wigner: delta_lines(p, &weights)?, energy: e, current, weights })
}

/// The Mc² ≫ |c𝚙| reduction of [`free_eigenstate_dirac`]: all weight on
/// n = 1 (particle) or n = 0 (antiparticle), 1/(4πħ) each.
pub fn free_dirac_nonrel_limit(p: f64, sign: Sign, hbar: f64) -> Result<DistributionalWigner> {
    positive("hbar", hbar)?;
    let w = 1.0 / (4.0 * PI * hbar);
    let weights = match sign {
        Sign::Particle => [0.0, 0.0, w, w],
        Sign::Antiparticle => [w, w, 0.0, 0.0],
    };
    delta_lines(p, &weights)
}

// ---------------------------------------------------------------------------
// exact check of the star eigenvalue equations

/// Polynomial in (u, m, E) with Gaussian-integer coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
struct Poly(BTreeMap<[u8; 3], (i64, i64)>);

impl Poly {
    fn mono(coef: (i64, i64), pow: [u8; 3]) -> Self {
        let mut p = Poly::default();
        p.add_term(pow, coef);
        p
    }

    fn add_term(&mut self, pow: [u8; 3], c: (i64, i64)) {
        let e = self.0.entry(pow).or_insert((0, 0));
        e.0 += c.0;
        e.1 += c.1;
        if *e == (0, 0) {
            self.0.remove(&pow);
        }
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (k, v) in &o.0 {
            r.add_term(*k, *v);
        }
        r
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::default();
        for (ka, (ar, ai)) in &self.0 {
            for (kb, (br, bi)) in &o.0 {
                let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                r.add_term(k, (ar * br - ai * bi, ar * bi + ai * br));
            }
        }
        r
    }

    /// Reduce modulo E² = u² + m².
    fn reduce_cone(&self) -> Poly {
        let mut cur = self.clone();
        loop {
            let Some((&k, &v)) = cur.0.iter().find(|(k, _)| k[2] >= 2) else { return cur };
            cur.0.remove(&k);
            cur.add_term([k[0] + 2, k[1], k[2] - 2], v);
            cur.add_term([k[0], k[1] + 2, k[2] - 2], v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEigenCheck {
    /// coefficient of δ(p − 𝚙) in (H ⋆ W − E·W) per component
    pub residual: [C64; 4],
    /// every weight is x-independent, so all ∂_x terms of the expansion vanish
    pub derivative_terms_vanish: bool,
    /// residual numerators reduce to the zero polynomial, per component
    pub symbolic_zero: [bool; 4],
}

impl FreeEigenCheck {
    pub fn exact(&self) -> bool {
        self.derivative_terms_vanish && self.symbolic_zero.iter().all(|z| *z)
    }
}

fn x_independent(dw: &DistributionalWigner) -> bool {
    dw.terms.iter().all(|t| {
        t.window.is_full_line()
            && match &t.kind {
                TermKind::DeltaLine { weight, .. } => {
                    weight.0.iter().all(|o| o.rate.is_constant() && o.phase.is_constant() && o.rate.c == 0.0)
                }
                _ => false,
            }
    })
}

/// Coefficients of δ(p − 𝚙) per component.
fn delta_weights(dw: &DistributionalWigner, p0: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for t in &dw.terms {
        if let TermKind::DeltaLine { p0: q, weight } = &t.kind {
            if *q == p0 {
                w[t.point.index()] += weight.eval(p0, 0.0);
            }
        }
    }
    w
}

/// Substitute a delta-line eigenstate into the four component equations of
/// H ⋆ W = E·W. With x-independent weights only the zeroth-order term of the
/// star expansion survives and H(p)δ(p − 𝚙) = H(𝚙)δ(p − 𝚙), so each
/// component reduces to Σ_ab C[mn][a][b]·H_a(𝚙)·w_b − E·w_mn.
///
/// `energy` defaults to the state's own energy. The symbolic check proves
/// the identity for all 𝚙 (nonrelativistic: it does not depend on the
/// energy; Dirac: modulo E² = c²𝚙² + M²c⁴).
pub fn verify_free_eigen_distributional(
    mode: Mode,
    p: f64,
    spin: Spin,
    sign: Sign,
    mass: f64,
    c: f64,
    energy: Option<f64>,
) -> Result<FreeEigenCheck> {
    let hbar = 1.0;
    let coeff = discrete_star_coefficients();
    let (state, h): (FreeEigenstate, [f64; 4]) = match mode {
        Mode::Nonrel => {
            let s = free_eigenstate_nonrel(p, spin, mass, hbar)?;
            let e = s.energy;
            (s, [e; 4])
        }
        Mode::Dirac => {
            let s = free_eigenstate_dirac(p, sign, mass, c, 1.0, hbar)?;
            let rest = mass * c * c;
            (s, [c * p - rest, -c * p - rest, c * p + rest, -c * p + rest])
        }
    };
    let e = energy.unwrap_or(state.energy);
    let w = delta_weights(&state.wigner, p);
    let residual = std::array::from_fn(|mn| {
        let mut s = ZERO;
        for b in 0..4 {
            let mut inner = ZERO;
            for a in 0..4 {
                inner += coeff[mn][a][b] * h[a];
            }
            s += inner * w[b];
        }
        s - e * w[mn]
    });
    let symbolic_zero = match mode {
        Mode::Nonrel => {
            // the residual is h·(Σ_b (Σ_a C[mn][a][b])·C_b − C_mn): check the
            // bracket with the integer brace factors
            std::array::from_fn(|mn| {
                let out = InternalPoint::from_index(mn);
                (0..4).all(|b| {
                    let sum: C64 = InternalPoint::ALL.iter().map(|&a| discrete_brace(out, a, InternalPoint::from_index(b))).sum();
                    let want = if b == mn { 16.0 } else { 0.0 };
                    sum == C64::new(want, 0.0)
                })
            })
        }
        Mode::Dirac => dirac_symbolic_residuals(),
    };
    Ok(FreeEigenCheck { residual, derivative_terms_vanish: x_independent(&state.wigner), symbolic_zero })
}

/// 16·(Σ_ab C[mn][a][b]·H_a·w_b − E·w_mn) with H_a = ±u ± m,
/// w = (d(u+d), d(d−u), u(u+d), u(u−d)) and d = E − m, reduced on the
/// mass shell E² = u² + m². Valid for both signs of E.
fn dirac_symbolic_residuals() -> [bool; 4] {
    let u = Poly::mono((1, 0), [1, 0, 0]);
    let m = Poly::mono((1, 0), [0, 1, 0]);
    let e = Poly::mono((1, 0), [0, 0, 1]);
    let neg = |p: &Poly| p.mul(&Poly::mono((-1, 0), [0, 0, 0]));
    let d = e.add(&neg(&m));
    let w = [d.mul(&u.add(&d)), d.mul(&d.add(&neg(&u))), u.mul(&u.add(&d)), u.mul(&u.add(&neg(&d)))];
    let h = [u.add(&neg(&m)), neg(&u).add(&neg(&m)), u.add(&m), neg(&u).add(&m)];
    std::array::from_fn(|mn| {
        let out = InternalPoint::from_index(mn);
        let mut total = e.mul(&w[mn]).mul(&Poly::mono((-16, 0), [0, 0, 0]));
        for a in 0..4 {
            for b in 0..4 {
                let br = discrete_brace(out, InternalPoint::from_index(a), InternalPoint::from_index(b));
                let k = Poly::mono((br.re as i64, br.im as i64), [0, 0, 0]);
                total = total.add(&k.mul(&h[a]).mul(&w[b]));
            }
        }
        total.reduce_cone().0.is_empty()
    })
}

// ---------------------------------------------------------------------------
// step scattering

fn check_spin(spin: &[C64; 2]) -> Result<()> {
    let n = spin[0].norm_sqr() + spin[1].norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::arg(format!("spin amplitudes must have unit norm, got |A1|² + |A0|² = {n}")));
    }
    Ok(())
}

/// Nonrelativistic step V(x) = V0·Y(x). The wave function is
/// ½(1 + r)e^{i𝚙x/ħ} + ½(1 − r)e^{−i𝚙x/ħ} for x < 0 and e^{ip̃x/ħ} for x > 0,
/// times (A1, A0), with r = p̃/𝚙.
pub fn solve_step_nonrel(cfg: &ScatterConfig) -> Result<StepSolution> {
    positive("mass", cfg.mass)?;
    positive("energy", cfg.energy)?;
    positive("hbar", cfg.hbar)?;
    check_spin(&cfg.spin)?;
    if !(cfg.v0 >= 0.0) {
        return Err(Error::arg(format!("step height must be non-negative, got {}", cfg.v0)));
    }
    if cfg.energy <= cfg.v0 {
        return Err(Error::unsupported("E ≤ V0: the tunnelling regime has no plane-wave closed form here"));
    }
    let m = cfg.mass;
    let p = (2.0 * m * cfg.energy).sqrt();
    let pt = (2.0 * m * (cfg.energy - cfg.v0)).sqrt();
    let r = pt / p;
    let amp = |k: f64| cfg.spin.map(|a| a * k);
    let pieces = vec![
        PlaneWavePiece::new(Window::negative(), amp(0.5 * (1.0 + r)), p),
        PlaneWavePiece::new(Window::negative(), amp(0.5 * (1.0 - r)), -p),
        PlaneWavePiece::new(Window::positive(), amp(1.0), pt),
    ];
    let j_inc = 0.25 * (1.0 + r).powi(2) * p / m;
    let j_ref = -0.25 * (1.0 - r).powi(2) * p / m;
    let j_trans = pt / m;
    let report = ScatterReport {
        p,
        p_tilde: pt,
        j_inc,
        j_ref,
        j_trans,
        t: j_trans / j_inc,
        r: j_ref.abs() / j_inc,
        n_trans: None,
        n_ref: None,
        regime: Regime::Nonrel,
    };
    let wigner = wigner_of_pieces(&pieces, cfg.hbar)?;
    Ok(StepSolution { report, state: SpinorWaveState::pieces(pieces, cfg.hbar)?, wigner })
}

/// Dirac step V(x) = V0·Y(x). Incident spinor (c𝚙/(E − Mc²), 1)e^{i𝚙x/ħ},
/// reflected N_ref·(−c𝚙/(E − Mc²), 1)e^{−i𝚙x/ħ}, transmitted
/// N_trans·(cp̃/(E − V0 − Mc²), 1)e^{ip̃x/ħ}. Matching at x = 0 gives
/// N_trans = 2k/(k + κ) with k = 𝚙/(E − Mc²), κ = p̃/(E − V0 − Mc²), and
/// N_ref = N_trans − 1.
pub fn solve_step_dirac(cfg: &ScatterConfig) -> Result<StepSolution> {
    positive("mass", cfg.mass)?;
    positive("speed of light", cfg.c)?;
    positive("hbar", cfg.hbar)?;
    let (e, v0, c) = (cfg.energy, cfg.v0, cfg.c);
    if !(e.is_finite() && v0.is_finite()) {
        return Err(Error::arg("energy and step height must be finite"));
    }
    let rest = cfg.mass * c * c;
    if e <= rest {
        return Err(Error::unsupported(format!("E = {e} is not above the rest energy Mc² = {rest}")));
    }
    let regime = if e + rest <= v0 {
        Regime::Klein
    } else if e - v0 > rest {
        Regime::AboveBarrier
    } else {
        return Err(Error::unsupported(format!("V0 = {v0} lies in the evanescent window ({}, {}]", e - rest, e + rest)));
    };
    let p = (e * e - rest * rest).sqrt() / c;
    let pt = ((e - v0).powi(2) - rest * rest).max(0.0).sqrt() / c;
    let k = p / (e - rest);
    let kappa = pt / (e - v0 - rest);
    let n_trans = 2.0 * k / (k + kappa);
    let n_ref = n_trans - 1.0;
    let q = cfg.q;
    let j_inc = 2.0 * c * c * q * p / (e - rest);
    let j_ref = -2.0 * c * c * q * p * n_ref * n_ref / (e - rest);
    let j_trans = 2.0 * c * c * q * pt * n_trans * n_trans / (e - v0 - rest);
    let one = C64::new(1.0, 0.0);
    let pieces = vec![
        PlaneWavePiece::new(Window::negative(), [C64::from(c * k), one], p),
        PlaneWavePiece::new(Window::negative(), [C64::from(-c * k * n_ref), C64::from(n_ref)], -p),
        PlaneWavePiece::new(Window::positive(), [C64::from(c * kappa * n_trans), C64::from(n_trans)], pt),
    ];
    let report = ScatterReport {
        p,
        p_tilde: pt,
        j_inc,
        j_ref,
        j_trans,
        t: j_trans.abs() / j_inc.abs(),
        r: j_ref.abs() / j_inc.abs(),
        n_trans: Some(n_trans),
        n_ref: Some(n_ref),
        regime,
    };
    let wigner = wigner_of_pieces(&pieces, cfg.hbar)?;
    Ok(StepSolution { report, state: SpinorWaveState::pieces(pieces, cfg.hbar)?, wigner })
}

pub fn solve_step(cfg: &ScatterConfig) -> Result<StepSolution> {
    match cfg.mode {
        Mode::Nonrel => solve_step_nonrel(cfg),
        Mode::Dirac => solve_step_dirac(cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KleinRow {
    pub v0: f64,
    pub n_trans: f64,
    pub n_ref: f64,
    pub t: f64,
    pub r: f64,
    pub r_minus_t: f64,
    /// j_trans/j_inc with its sign
    pub t_signed: f64,
    pub error: Option<String>,
}

/// Transmission data of the Dirac step over a list of heights, each row
/// solved independently. Heights outside the Klein regime give a row with
/// `error` set and NaN values.
pub fn klein_scan(energy: f64, mass: f64, c: f64, q: f64, v0_values: &[f64]) -> Vec<KleinRow> {
    v0_values
        .par_iter()
        .map(|&v0| {
            let cfg = ScatterConfig::dirac(energy, v0, mass, c, q);
            let res = solve_step_dirac(&cfg).and_then(|s| {
                if s.report.regime == Regime::Klein {
                    Ok(s.report)
                } else {
                    Err(Error::arg(format!("V0 = {v0} is not above E + Mc²")))
                }
            });
            match res {
                Ok(r) => KleinRow {
                    v0,
                    n_trans: r.n_trans.unwrap_or(f64::NAN),
                    n_ref: r.n_ref.unwrap_or(f64::NAN),
                    t: r.t,
                    r: r.r,
                    r_minus_t: r.r - r.t,
                    t_signed: r.j_trans / r.j_inc,
                    error: None,
                },
                Err(e) => KleinRow {
                    v0,
                    n_trans: f64::NAN,
                    n_ref: f64::NAN,
                    t: f64::NAN,
                    r: f64::NAN,
                    r_minus_t: f64::NAN,
                    t_signed: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Limit of N_trans for V0 → ∞: 1 + E/Mc² + √(E² − M²c⁴)/Mc².
pub fn klein_n_trans_limit(energy: f64, mass: f64, c: f64) -> f64 {
    let rest = mass * c * c;
    1.0 + energy / rest + (energy * energy - rest * rest).sqrt() / rest
}
