//! Two-component wave functions (Ψ1, Ψ0).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Window;

/// `amplitude · exp(i·momentum·x/ħ)` on an open window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWavePiece {
    pub window: Window,
    /// (c1, c0): the |1⟩ and |0⟩ amplitudes.
    pub amplitude: [C64; 2],
    pub momentum: f64,
}

impl PlaneWavePiece {
    pub fn new(window: Window, amplitude: [C64; 2], momentum: f64) -> Self {
        Self { window, amplitude, momentum }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Representation {
    Pieces(Vec<PlaneWavePiece>),
    /// Samples at x_i = x_min + i·(x_max − x_min)/(n − 1).
    Sampled {
        x_min: f64,
        x_max: f64,
        upper: Vec<C64>,
        lower: Vec<C64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinorWaveState {
    pub hbar: f64,
    pub repr: Representation,
}

impl SpinorWaveState {
    pub fn pieces(pieces: Vec<PlaneWavePiece>, hbar: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::arg("state has no plane-wave pieces"));
        }
        for pc in &pieces {
            Window::new(pc.window.lo, pc.window.hi)?;
            if !pc.momentum.is_finite() || pc.amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::arg("plane-wave piece has non-finite data"));
            }
        }
        Self::check_hbar(hbar)?;
        Ok(Self { hbar, repr: Representation::Pieces(pieces) })
    }

    pub fn sampled(x_min: f64, x_max: f64, upper: Vec<C64>, lower: Vec<C64>, hbar: f64) -> Result<Self> {
        if upper.len() != lower.len() || upper.len() < 2 {
            return Err(Error::arg("sampled state needs two equal-length component arrays of length >= 2"));
        }
        if !(x_max > x_min) {
            return Err(Error::arg("sampled state needs x_max > x_min"));
        }
        Self::check_hbar(hbar)?;
        Ok(Self { hbar, repr: Representation::Sampled { x_min, x_max, upper, lower } })
    }

    /// Sample a closure on n points of [x_min, x_max].
    pub fn sample_fn(x_min: f64, x_max: f64, n: usize, hbar: f64, f: impl Fn(f64) -> [C64; 2]) -> Result<Self> {
        let h = (x_max - x_min) / (n.max(2) - 1) as f64;
        let (upper, lower) = (0..n).map(|i| f(x_min + i as f64 * h)).map(|v| (v[0], v[1])).unzip();
        Self::sampled(x_min, x_max, upper, lower, hbar)
    }

    fn check_hbar(hbar: f64) -> Result<()> {
        if hbar > 0.0 && hbar.is_finite() {
            Ok(())
        } else {
            Err(Error::arg("hbar must be positive"))
        }
    }

    pub fn as_pieces(&self) -> Option<&[PlaneWavePiece]> {
        match &self.repr {
            Representation::Pieces(p) => Some(p),
            Representation::Sampled { .. } => None,
        }
    }

    fn check_not_on_boundary(&self, x: f64) -> Result<()> {
        if let Some(pieces) = self.as_pieces() {
            if pieces.iter().any(|pc| x == pc.window.lo || x == pc.window.hi) {
                return Err(Error::domain(format!("x = {x} lies on a window boundary")));
            }
        }
        Ok(())
    }

    /// (Ψ1(x), Ψ0(x)) for the piece representation.
    pub fn value(&self, x: f64) -> Result<[C64; 2]> {
        self.check_not_on_boundary(x)?;
        let pieces = self.as_pieces().ok_or_else(|| Error::unsupported("pointwise values need the piece representation"))?;
        let mut out = [C64::new(0.0, 0.0); 2];
        for pc in pieces.iter().filter(|pc| pc.window.contains(x)) {
            let ph = C64::from_polar(1.0, pc.momentum * x / self.hbar);
            out[0] += pc.amplitude[0] * ph;
            out[1] += pc.amplitude[1] * ph;
        }
        Ok(out)
    }

    /// (dΨ1/dx, dΨ0/dx) for the piece representation.
    pub fn derivative(&self, x: f64) -> Result<[C64; 2]> {
        self.check_not_on_boundary(x)?;
        let pieces = self.as_pieces().ok_or_else(|| Error::unsupported("pointwise values need the piece representation"))?;
        let mut out = [C64::new(0.0, 0.0); 2];
        for pc in pieces.iter().filter(|pc| pc.window.contains(x)) {
            let ph = C64::new(0.0, pc.momentum / self.hbar) * C64::from_polar(1.0, pc.momentum * x / self.hbar);
            out[0] += pc.amplitude[0] * ph;
            out[1] += pc.amplitude[1] * ph;
        }
        Ok(out)
    }
}
