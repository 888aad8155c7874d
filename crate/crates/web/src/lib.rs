//! wasm-bindgen exports behind `www/index.html`. The plain functions return
//! `Result<_, String>` so they can be tested natively; the `#[wasm_bindgen]`
//! wrappers convert errors to JS exceptions.

use psqm::distribution::sample_distributional;
use psqm::quantizer::{hamilton_symbol, HamiltonSymbol, OperatorSpec, Potential};
use psqm::scattering::{klein_scan, solve_step, ScatterConfig};
use psqm::star::{evolve, max_stable_dt};
use psqm::verify::{centroid_and_norm, gaussian_packet};
use psqm::{PhaseGrid, SymbolField, C64};
use wasm_bindgen::prelude::*;

fn msg(e: psqm::Error) -> String {
    e.to_string()
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

/// Rows of (V0, T, R, N_trans), flattened. Heights outside the Klein
/// regime give NaN entries.
pub fn klein_rows(energy: f64, mass: f64, c: f64, v0_min: f64, v0_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 || !(v0_max > v0_min) {
        return Err("need at least two heights and v0_max > v0_min".into());
    }
    let heights: Vec<f64> = linspace(v0_min, v0_max, n).collect();
    let mut out = Vec::with_capacity(4 * n);
    for row in klein_scan(energy, mass, c, 1.0, &heights) {
        match row.error {
            None => out.extend([row.v0, row.t, row.r, row.n_trans]),
            Some(_) => out.extend([row.v0, f64::NAN, f64::NAN, f64::NAN]),
        }
    }
    Ok(out)
}

/// Total Wigner function of the non-relativistic step eigenstate sampled
/// on an n_p × n_x grid (row k is momentum p_k), with every delta line
/// smeared to a Gaussian of width `sigma_p`.
#[allow(clippy::too_many_arguments)]
pub fn step_wigner_grid(
    energy: f64,
    v0: f64,
    mass: f64,
    x_range: (f64, f64),
    n_x: usize,
    p_range: (f64, f64),
    n_p: usize,
    sigma_p: f64,
) -> Result<Vec<f64>, String> {
    let sol = solve_step(&ScatterConfig::nonrel(energy, v0, mass)).map_err(msg)?;
    let grid = PhaseGrid::new(x_range, n_x, p_range, n_p).map_err(msg)?;
    let w = sample_distributional(&sol.wigner, &grid, sigma_p).map_err(msg)?;
    let mut total = vec![0.0; grid.len()];
    for comp in &w.values {
        for (t, v) in total.iter_mut().zip(comp) {
            *t += v;
        }
    }
    Ok(total)
}

#[wasm_bindgen]
pub fn klein_curve(energy: f64, mass: f64, c: f64, v0_min: f64, v0_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    klein_rows(energy, mass, c, v0_min, v0_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn step_wigner(
    energy: f64,
    v0: f64,
    mass: f64,
    x_min: f64,
    x_max: f64,
    n_x: usize,
    p_min: f64,
    p_max: f64,
    n_p: usize,
    sigma_p: f64,
) -> Result<Vec<f64>, JsError> {
    step_wigner_grid(energy, v0, mass, (x_min, x_max), n_x, (p_min, p_max), n_p, sigma_p).map_err(|e| JsError::new(&e))
}

/// A spin-up Gaussian packet under a non-relativistic Hamiltonian with
/// mass 1, advanced with the phase-space RK4 integrator.
#[wasm_bindgen]
pub struct Packet {
    w: SymbolField,
    h: HamiltonSymbol,
    dt: f64,
    t: f64,
    norm0: f64,
}

impl Packet {
    /// `potential` is one of zero, step, linear, harmonic.
    pub fn build(x0: f64, p0: f64, width: f64, potential: &str, strength: f64, n_x: usize, n_p: usize) -> Result<Packet, String> {
        let potential = match potential {
            "zero" => Potential::Zero,
            "step" => Potential::Step { height: strength },
            "linear" => Potential::Linear { slope: strength },
            "harmonic" => Potential::Harmonic { k: strength },
            other => return Err(format!("unknown potential `{other}`")),
        };
        let grid = PhaseGrid::new((-16.0, 16.0), n_x, (-6.0, 6.0), n_p).map_err(msg)?;
        let h = hamilton_symbol(&OperatorSpec::Nonrelativistic { mass: 1.0, potential, v00: 1.0, v11: 1.0 }).map_err(msg)?;
        let w = gaussian_packet(&grid, x0, p0, width, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let dt = 0.5 * max_stable_dt(&h, &grid);
        let (_, norm0) = centroid_and_norm(&w);
        Ok(Packet { w, h, dt, t: 0.0, norm0 })
    }

    pub fn advance_by(&mut self, steps: usize) -> Result<(), String> {
        if steps == 0 {
            return Ok(());
        }
        let tr = evolve(&self.w, &self.h, steps as f64 * self.dt, self.dt, steps).map_err(msg)?;
        self.w = tr.frames.last().expect("frames").clone();
        self.t += steps as f64 * self.dt;
        Ok(())
    }
}

#[wasm_bindgen]
impl Packet {
    #[wasm_bindgen(constructor)]
    pub fn new(x0: f64, p0: f64, width: f64, potential: &str, strength: f64, n_x: usize, n_p: usize) -> Result<Packet, JsError> {
        Packet::build(x0, p0, width, potential, strength, n_x, n_p).map_err(|e| JsError::new(&e))
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.advance_by(steps).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_x(&self) -> usize {
        self.w.grid.n_x
    }

    pub fn n_p(&self) -> usize {
        self.w.grid.n_p
    }

    /// (centroid, norm/norm at t = 0)
    pub fn observables(&self) -> Vec<f64> {
        let (xc, n) = centroid_and_norm(&self.w);
        vec![xc, n / self.norm0]
    }

    /// ρ(x) on the x grid.
    pub fn density(&self) -> Vec<f64> {
        self.w.real_part().total_moment_profile(0)
    }

    /// Σ over internal points of Re W, n_p × n_x row-major.
    pub fn wigner(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.w.grid.len()];
        for comp in &self.w.values {
            for (t, v) in total.iter_mut().zip(comp) {
                *t += v.re;
            }
        }
        total
    }
}
