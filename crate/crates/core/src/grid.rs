use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform (p, x) grid. Both ends are sampled: x_i = x_min + i·Δx with
/// Δx = (x_max − x_min)/(n_x − 1), and likewise for p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    pub hbar: f64,
}

impl PhaseGrid {
    pub fn new(x_range: (f64, f64), n_x: usize, p_range: (f64, f64), n_p: usize) -> Result<Self> {
        Self::with_hbar(x_range, n_x, p_range, n_p, 1.0)
    }

    pub fn with_hbar((x_min, x_max): (f64, f64), n_x: usize, (p_min, p_max): (f64, f64), n_p: usize, hbar: f64) -> Result<Self> {
        let g = Self { x_min, x_max, n_x, p_min, p_max, n_p, hbar };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_p < 2 {
            return Err(Error::arg(format!("grid needs n_x, n_p >= 2 (got {}, {})", self.n_x, self.n_p)));
        }
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max, self.hbar].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.p_max <= self.p_min {
            return Err(Error::arg("grid ranges must be finite with max > min"));
        }
        if self.hbar <= 0.0 {
            return Err(Error::arg("hbar must be positive"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p_min + k as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|k| self.p(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of sample (p_k, x_i); rows are momenta.
    pub fn index(&self, k: usize, i: usize) -> usize {
        k * self.n_x + i
    }

    pub fn is_p_symmetric(&self) -> bool {
        (self.p_min + self.p_max).abs() <= 1e-12 * self.p_max.abs()
    }

    pub fn require_p_symmetric(&self) -> Result<()> {
        if self.is_p_symmetric() {
            Ok(())
        } else {
            Err(Error::arg(format!("FFT star products need a symmetric momentum range, got [{}, {}]", self.p_min, self.p_max)))
        }
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self == other
    }

    pub fn require_same(&self, other: &PhaseGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::arg("operands live on different grids"))
        }
    }

    /// Fractional column position of x, or None when outside the grid.
    pub fn locate_x(&self, x: f64) -> Option<f64> {
        let t = (x - self.x_min) / self.dx();
        let last = (self.n_x - 1) as f64;
        if t < -1e-9 || t > last + 1e-9 {
            None
        } else {
            Some(t.clamp(0.0, last))
        }
    }
}

/// A point (φ_m, n) of the discrete phase space Γ², φ_m = πm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InternalPoint {
    pub m: u8,
    pub n: u8,
}

impl InternalPoint {
    /// Component order used throughout: (0,0), (1,0), (0,1), (1,1).
    pub const ALL: [InternalPoint; 4] =
        [InternalPoint { m: 0, n: 0 }, InternalPoint { m: 1, n: 0 }, InternalPoint { m: 0, n: 1 }, InternalPoint { m: 1, n: 1 }];

    pub fn new(m: u8, n: u8) -> Result<Self> {
        if m > 1 || n > 1 {
            return Err(Error::arg(format!("internal point ({m},{n}) outside {{0,1}}²")));
        }
        Ok(Self { m, n })
    }

    pub fn index(self) -> usize {
        (self.m + 2 * self.n) as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn phi(self) -> f64 {
        std::f64::consts::PI * self.m as f64
    }
}

impl std::fmt::Display for InternalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}
