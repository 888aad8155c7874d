//! Phase-space quantum mechanics for a particle on the line carrying one
//! binary internal degree of freedom (spin-½ projection or the
//! particle/antiparticle label of the 1-D Dirac equation).
//!
//! Phase space is ℝ² × Γ², where Γ² = {(φ_m, n) : m, n ∈ {0, 1}} with
//! φ_m = πm. Every Wigner function or symbol therefore has four real (or
//! complex) components indexed by [`InternalPoint`].
//!
//! Modules:
//! - [`grid`], [`matrix`], [`expr`], [`distribution`], [`field`], [`state`]:
//!   value types
//! - [`quantizer`]: the discrete Stratonovich–Weyl frame and symbol maps
//! - [`star`]: Moyal star products, brackets and time evolution
//! - [`continuity`]: densities, currents and regularized moments
//! - [`scattering`]: free eigenstates, step potentials, Klein paradox
//! - [`verify`]: the identity checks behind the `verify` command

pub mod continuity;
pub mod distribution;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid;
pub mod matrix;
pub mod quantizer;
pub mod scattering;
pub mod special;
pub mod spectral;
pub mod star;
pub mod state;
pub mod verify;

pub use distribution::{DistributionalWigner, Term, TermKind, TermRole};
pub use error::{Error, Result};
pub use expr::{Affine, Oscillation, Trig, Waveform, Window};
pub use field::{SymbolField, WignerField};
pub use grid::{InternalPoint, PhaseGrid};
pub use matrix::Matrix2;
pub use num_complex::Complex64 as C64;
pub use state::{PlaneWavePiece, SpinorWaveState};
