//! Closed-form coefficient functions for distributional Wigner terms.
//!
//! Every coefficient that appears in the exact Wigner functions of plane-wave
//! states is a finite sum of `amp · trig(rate(x)·p + phase(x))` where `rate`
//! and `phase` are piecewise-linear in x with at most one kink. That is all
//! this module represents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c + a·x + b·|x − s|`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

impl Affine {
    pub const fn constant(c: f64) -> Self {
        Self { c, a: 0.0, b: 0.0, s: 0.0 }
    }

    pub const fn linear(c: f64, a: f64) -> Self {
        Self { c, a, b: 0.0, s: 0.0 }
    }

    pub const fn kinked(c: f64, a: f64, b: f64, s: f64) -> Self {
        Self { c, a, b, s }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let kink = if self.b == 0.0 { 0.0 } else { self.b * (x - self.s).abs() };
        self.c + self.a * x + kink
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { c: self.c * k, a: self.a * k, b: self.b * k, s: self.s }
    }

    /// Sum of two affines; fails when both carry kinks at different points.
    pub fn plus(&self, other: &Affine) -> Result<Self> {
        let (b, s) = match (self.b == 0.0, other.b == 0.0) {
            (true, true) => (0.0, 0.0),
            (false, true) => (self.b, self.s),
            (true, false) => (other.b, other.s),
            (false, false) if self.s == other.s => (self.b + other.b, self.s),
            _ => return Err(Error::unsupported("sum of affines with distinct kinks")),
        };
        Ok(Self { c: self.c + other.c, a: self.a + other.a, b, s })
    }

    pub fn is_constant(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trig {
    Sin,
    Cos,
}

/// `amp · trig(rate(x)·p + phase(x))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amp: f64,
    pub trig: Trig,
    pub rate: Affine,
    pub phase: Affine,
}

impl Oscillation {
    pub fn new(amp: f64, trig: Trig, rate: Affine, phase: Affine) -> Self {
        Self { amp, trig, rate, phase }
    }

    /// x-independent constant `amp`.
    pub fn constant(amp: f64) -> Self {
        Self::new(amp, Trig::Cos, Affine::constant(0.0), Affine::constant(0.0))
    }

    pub fn eval(&self, p: f64, x: f64) -> f64 {
        let arg = self.rate.eval(x) * p + self.phase.eval(x);
        match self.trig {
            Trig::Sin => self.amp * arg.sin(),
            Trig::Cos => self.amp * arg.cos(),
        }
    }

    /// ∂/∂p of the oscillation.
    pub fn eval_dp(&self, p: f64, x: f64) -> f64 {
        let a = self.rate.eval(x);
        let arg = a * p + self.phase.eval(x);
        match self.trig {
            Trig::Sin => self.amp * a * arg.cos(),
            Trig::Cos => -self.amp * a * arg.sin(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { amp: self.amp * k, ..*self }
    }
}

/// A finite sum of oscillations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Waveform(pub Vec<Oscillation>);

impl Waveform {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(v: f64) -> Self {
        Self(vec![Oscillation::constant(v)])
    }

    pub fn single(o: Oscillation) -> Self {
        Self(vec![o])
    }

    pub fn eval(&self, p: f64, x: f64) -> f64 {
        self.0.iter().map(|o| o.eval(p, x)).sum()
    }

    pub fn eval_dp(&self, p: f64, x: f64) -> f64 {
        self.0.iter().map(|o| o.eval_dp(p, x)).sum()
    }

    pub fn push(&mut self, o: Oscillation) {
        if o.amp != 0.0 {
            self.0.push(o);
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.iter().map(|o| o.scaled(k)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|o| o.amp == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|o| {
            [o.amp, o.rate.c, o.rate.a, o.rate.b, o.rate.s, o.phase.c, o.phase.a, o.phase.b, o.phase.s].iter().all(|v| v.is_finite())
        })
    }
}

/// Open spatial interval (lo, hi); the ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::arg(format!("empty window ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn full_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// Y(−x): the open half-line x < 0.
    pub const fn negative() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: 0.0 }
    }

    /// Y(x): the open half-line x > 0.
    pub const fn positive() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_full_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn disjoint(&self, other: &Window) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}
