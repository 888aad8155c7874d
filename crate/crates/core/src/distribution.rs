//! Exact Wigner functions of plane-wave states as lists of delta lines,
//! principal-value lines and smooth terms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Waveform, Window};
use crate::field::WignerField;
use crate::grid::{InternalPoint, PhaseGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    /// `weight(x) · δ(p − p0)`; the weight waveform is evaluated at p = p0.
    DeltaLine { p0: f64, weight: Waveform },
    /// `envelope(p, x) · vp 1/(p − p0)`
    PvLine { p0: f64, envelope: Waveform },
    /// `numerator(p, x)`, or `numerator(p, x)/(p − pole)` when a pole is
    /// given. The numerator vanishes at the pole, so the quotient is smooth.
    Smooth { numerator: Waveform, pole: Option<f64> },
}

/// Which plane-wave pieces a term came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermRole {
    /// |piece⟩⟨piece|
    Direct(usize),
    /// the cross terms of two distinct pieces
    Interference(usize, usize),
}

impl TermRole {
    pub fn is_interference(&self) -> bool {
        matches!(self, TermRole::Interference(..))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub point: InternalPoint,
    pub window: Window,
    pub kind: TermKind,
    pub role: TermRole,
}

impl Term {
    /// Value of the non-delta part at (p, x). PV lines return a non-finite
    /// value exactly at their singular momentum.
    pub fn eval_regular(&self, p: f64, x: f64) -> f64 {
        if !self.window.contains(x) {
            return 0.0;
        }
        match &self.kind {
            TermKind::DeltaLine { .. } => 0.0,
            TermKind::PvLine { p0, envelope } => envelope.eval(p, x) / (p - p0),
            TermKind::Smooth { numerator, pole: None } => numerator.eval(p, x),
            TermKind::Smooth { numerator, pole: Some(p0) } => smooth_quotient(numerator, *p0, p, x),
        }
    }

    /// (p0, weight) when this is a delta line active at x.
    pub fn delta_at(&self, x: f64) -> Option<(f64, f64)> {
        match &self.kind {
            TermKind::DeltaLine { p0, weight } if self.window.contains(x) => Some((*p0, weight.eval(*p0, x))),
            _ => None,
        }
    }

    /// Singular or delta momentum of the term, if any.
    pub fn singular_momentum(&self) -> Option<f64> {
        match &self.kind {
            TermKind::DeltaLine { p0, .. } | TermKind::PvLine { p0, .. } => Some(*p0),
            TermKind::Smooth { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match &self.kind {
            TermKind::DeltaLine { p0, weight } => p0.is_finite() && weight.is_finite(),
            TermKind::PvLine { p0, envelope } => p0.is_finite() && envelope.is_finite(),
            TermKind::Smooth { numerator, pole } => numerator.is_finite() && pole.is_none_or(|p| p.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::arg("distributional term has non-finite coefficients"))
        }
    }
}

/// numerator/(p − p0), continued by l'Hôpital at the pole.
pub(crate) fn smooth_quotient(numerator: &Waveform, p0: f64, p: f64, x: f64) -> f64 {
    let d = p - p0;
    if d.abs() <= 1e-9 * (1.0 + p0.abs()) {
        numerator.eval_dp(p0, x)
    } else {
        numerator.eval(p, x) / d
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistributionalWigner {
    pub terms: Vec<Term>,
}

impl DistributionalWigner {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        Ok(Self { terms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn union(&self, other: &DistributionalWigner) -> DistributionalWigner {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn filter(&self, keep: impl Fn(&Term) -> bool) -> DistributionalWigner {
        Self { terms: self.terms.iter().filter(|t| keep(t)).cloned().collect() }
    }

    pub fn component(&self, pt: InternalPoint) -> DistributionalWigner {
        self.filter(|t| t.point == pt)
    }

    pub fn with_role(&self, role: TermRole) -> DistributionalWigner {
        self.filter(|t| t.role == role)
    }

    pub fn interference(&self) -> DistributionalWigner {
        self.filter(|t| t.role.is_interference())
    }

    /// Non-delta part of component `pt` at (p, x).
    pub fn eval_regular(&self, pt: InternalPoint, p: f64, x: f64) -> f64 {
        self.terms.iter().filter(|t| t.point == pt).map(|t| t.eval_regular(p, x)).sum()
    }

    /// Delta lines of component `pt` active at x, as (p0, weight).
    pub fn deltas(&self, pt: InternalPoint, x: f64) -> Vec<(f64, f64)> {
        self.terms.iter().filter(|t| t.point == pt).filter_map(|t| t.delta_at(x)).collect()
    }
}

/// Average of 1/(p − p0) over the cell [p − h/2, p + h/2].
fn pv_cell_average(p: f64, p0: f64, h: f64) -> f64 {
    let a = p - 0.5 * h - p0;
    let b = p + 0.5 * h - p0;
    if a == 0.0 || b == 0.0 {
        // a cell edge on the pole: the symmetric half-cell cancels
        return if a == 0.0 { (2.0f64).ln() / h } else { -(2.0f64).ln() / h };
    }
    (b / a).abs().ln() / h
}

/// Render a distributional Wigner function on a grid. Delta lines become
/// normalized Gaussians of width `sigma_p`; PV lines use the cell average of
/// 1/(p − p0), which is finite on the singular cell.
pub fn sample_distributional(dw: &DistributionalWigner, grid: &PhaseGrid, sigma_p: f64) -> Result<WignerField> {
    grid.validate()?;
    if !(sigma_p > 0.0) || !sigma_p.is_finite() {
        return Err(Error::arg(format!("smearing width must be positive, got {sigma_p}")));
    }
    for t in &dw.terms {
        if let Some(p0) = t.singular_momentum() {
            if p0 < grid.p_min || p0 > grid.p_max {
                return Err(Error::domain(format!("term at p0 = {p0} lies outside the momentum range [{}, {}]", grid.p_min, grid.p_max)));
            }
        }
    }
    let (n_x, n_p, dp) = (grid.n_x, grid.n_p, grid.dp());
    let xs = grid.xs();
    let norm = 1.0 / (sigma_p * (2.0 * std::f64::consts::PI).sqrt());
    let mut out = WignerField::zeros(*grid);
    for pt in InternalPoint::ALL {
        let terms: Vec<&Term> = dw.terms.iter().filter(|t| t.point == pt).collect();
        if terms.is_empty() {
            continue;
        }
        out.values[pt.index()].par_chunks_mut(n_x).enumerate().for_each(|(k, row)| {
            let p = grid.p(k);
            for t in &terms {
                for (i, v) in row.iter_mut().enumerate() {
                    let x = xs[i];
                    if !t.window.contains(x) {
                        continue;
                    }
                    *v += match &t.kind {
                        TermKind::DeltaLine { p0, weight } => {
                            let z = (p - p0) / sigma_p;
                            weight.eval(*p0, x) * norm * (-0.5 * z * z).exp()
                        }
                        TermKind::PvLine { p0, envelope } => envelope.eval(p, x) * pv_cell_average(p, *p0, dp),
                        _ => t.eval_regular(p, x),
                    };
                }
            }
        });
        debug_assert_eq!(out.values[pt.index()].len(), n_x * n_p);
    }
    Ok(out)
}
