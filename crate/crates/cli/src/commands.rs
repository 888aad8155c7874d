//! One function per command. Each returns a [`RunReport`] whose identity
//! checks decide the exit status.

use std::f64::consts::PI;

use psqm::continuity::{
    continuity_residual_profile, current, frame_current, oracle_current_wavefunction, spatial_density, CurrentMode, WignerRef,
};
use psqm::quantizer::{hamilton_symbol, OperatorSpec};
use psqm::scattering::{
    free_eigenstate_dirac, free_eigenstate_nonrel, klein_scan, solve_step, verify_free_eigen_distributional, Mode, Regime, ScatterConfig,
    Sign, Spin,
};
use psqm::star::{evolve, Trajectory};
use psqm::verify::{centroid_and_norm, gaussian_packet, run_all, run_one, IdentityCheck};
use psqm::{InternalPoint, PhaseGrid, SymbolField, TermKind};
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::report::{Cell, RunReport, Table};
use crate::CliError;

// identity tolerances
const FREE_CURRENT_TOL: f64 = 1e-12;
const FLUX_TOL: f64 = 1e-12;
const PROFILE_CURRENT_TOL: f64 = 1e-10;
const NORM_DRIFT_TOL: f64 = 1e-6;
const CONTINUITY_TOL: f64 = 1e-6;

pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let cfg = cfg.resolve()?;
    let cmd = cfg.command.expect("resolved");
    // the output directory is not part of the run
    let params = serde_json::to_value(RunConfig { out: None, ..cfg.clone() }).expect("config serializes");
    let (result, checks, tables) = match cmd {
        Command::FreeNonrel => free_nonrel(&cfg),
        Command::FreeDirac => free_dirac(&cfg),
        Command::Step => step(&cfg),
        Command::KleinScan => klein(&cfg),
        Command::Evolve => evolve_packet(&cfg),
        Command::Verify => verify(&cfg),
    }
    .map_err(|e| CliError::Solver(format!("{cmd}: {e}")))?;
    Ok(RunReport::new(cmd.to_string(), params, result, checks, tables))
}

type Outcome = (serde_json::Value, Vec<IdentityCheck>, Vec<Table>);

fn f(v: Option<f64>) -> f64 {
    v.expect("resolved parameter")
}

fn weights_table(weights: &[f64; 4], p0: f64) -> Table {
    let mut t = Table::new("components", &["m", "n", "p0", "weight"]);
    for pt in InternalPoint::ALL {
        t.push(vec![(pt.m as i64).into(), (pt.n as i64).into(), p0.into(), weights[pt.index()].into()]);
    }
    t
}

fn free_nonrel(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let (p, mass, hbar) = (f(cfg.p), f(cfg.mass), f(cfg.hbar));
    let spin: Spin = cfg.spin.expect("resolved").to_spin();
    let state = free_eigenstate_nonrel(p, spin, mass, hbar)?;
    let policy = cfg.regularization.clone().expect("resolved");
    let j = current(WignerRef::Exact(&state.wigner, &policy), CurrentMode::Nonrel { mass }, 0.0)?;
    let expected = p / (2.0 * PI * hbar * mass);
    let eigen = verify_free_eigen_distributional(Mode::Nonrel, p, spin, Sign::Particle, mass, 1.0, None)?;
    let checks = vec![
        IdentityCheck::holds("star_eigen_residual_zero", eigen.exact()),
        IdentityCheck::within("current_vs_closed_form", (j - expected).abs(), FREE_CURRENT_TOL),
    ];
    let result = json!({ "energy": state.energy, "current": j, "current_expected": expected });
    Ok((result, checks, vec![weights_table(&state.weights, p)]))
}

fn free_dirac(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let (p, mass, c, q, hbar) = (f(cfg.p), f(cfg.mass), f(cfg.c), f(cfg.q), f(cfg.hbar));
    let sign = cfg.sign.expect("resolved");
    let state = free_eigenstate_dirac(p, sign, mass, c, q, hbar)?;
    let policy = cfg.regularization.clone().expect("resolved");
    let j = current(WignerRef::Exact(&state.wigner, &policy), CurrentMode::Dirac { mass, q, c }, 0.0)?;
    let e = (c * c * p * p + mass * mass * c.powi(4)).sqrt();
    let s = if sign == Sign::Particle { 1.0 } else { -1.0 };
    let expected = s * q * c * c * p / (2.0 * PI * hbar * e);
    let eigen = verify_free_eigen_distributional(Mode::Dirac, p, Spin::Up, sign, mass, c, None)?;
    let mut checks = vec![
        IdentityCheck::holds("star_eigen_residual_zero", eigen.exact()),
        IdentityCheck::within("current_vs_closed_form", (j - expected).abs(), FREE_CURRENT_TOL),
    ];
    if p == 0.0 {
        // at rest the whole weight sits on the components whose kinetic symbol is ±Mc²
        let h = hamilton_symbol(&OperatorSpec::Dirac {
            mass,
            c,
            charge: q,
            potential: psqm::quantizer::Potential::Zero,
            v00: 1.0,
            v11: 1.0,
            v01: psqm::C64::new(0.0, 0.0),
        })?;
        let rest = s * mass * c * c;
        let off: f64 = (0..4).filter(|&a| h.kinetic[a].c0 != rest).map(|a| state.weights[a].abs()).sum();
        checks.push(IdentityCheck::within("rest_weight_on_rest_energy_components", off, 0.0));
    }
    let result = json!({ "energy": state.energy, "current": j, "current_expected": expected });
    Ok((result, checks, vec![weights_table(&state.weights, p)]))
}

fn step(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let mode = cfg.mode.expect("resolved");
    let sc = ScatterConfig {
        energy: f(cfg.energy),
        mass: f(cfg.mass),
        c: f(cfg.c),
        v0: cfg.v0_value(),
        q: f(cfg.q),
        spin: cfg.spin.and_then(|s| s.spinor()).unwrap_or([psqm::C64::new(1.0, 0.0), psqm::C64::new(0.0, 0.0)]),
        mode,
        hbar: f(cfg.hbar),
    };
    let sol = solve_step(&sc)?;
    let r = sol.report;
    let cmode = match mode {
        Mode::Nonrel => CurrentMode::Nonrel { mass: sc.mass },
        Mode::Dirac => CurrentMode::Dirac { mass: sc.mass, q: sc.q, c: sc.c },
    };
    let policy = cfg.regularization.clone().expect("resolved");
    let w = WignerRef::Exact(&sol.wigner, &policy);
    let (x_min, x_max, n_x) = (f(cfg.x_min), f(cfg.x_max), cfg.n_x.expect("resolved"));
    let mut profile = Table::new("profile", &["x", "rho", "j"]);
    let (mut closed_err, mut oracle_err) = (0.0f64, 0.0f64);
    for k in 0..n_x {
        let x = if n_x == 1 { x_min } else { x_min + (x_max - x_min) * k as f64 / (n_x - 1) as f64 };
        let rho = spatial_density(w, x)?;
        let j = current(w, cmode, x)?;
        let want = if x < 0.0 { r.j_inc + r.j_ref } else { r.j_trans };
        closed_err = closed_err.max((j - want).abs());
        // the wave function has no derivative at the step itself
        match oracle_current_wavefunction(&sol.state, x, cmode) {
            Ok(jw) => oracle_err = oracle_err.max((j - jw).abs()),
            Err(psqm::Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
        profile.push(vec![x.into(), rho.into(), j.into()]);
    }
    let scale = r.j_inc.abs();
    let mut checks = match r.regime {
        Regime::Klein => vec![IdentityCheck::within("r_minus_t_equals_one", (r.r - r.t - 1.0).abs(), FLUX_TOL)],
        _ => vec![IdentityCheck::within("t_plus_r_equals_one", (r.t + r.r - 1.0).abs(), FLUX_TOL)],
    };
    checks.push(IdentityCheck::within("flux_continuity_at_step", (r.j_inc + r.j_ref - r.j_trans).abs() / scale, FLUX_TOL));
    checks.push(IdentityCheck::within("profile_current_vs_closed_form", closed_err / scale, PROFILE_CURRENT_TOL));
    checks.push(IdentityCheck::within("phase_space_vs_wavefunction_current", oracle_err / scale, PROFILE_CURRENT_TOL));
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let mut rep = Table::new("report", &["p", "p_tilde", "j_inc", "j_ref", "j_trans", "T", "R", "N_trans", "N_ref", "regime"]);
    let regime = serde_json::to_value(r.regime).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    rep.push(vec![
        r.p.into(),
        r.p_tilde.into(),
        r.j_inc.into(),
        r.j_ref.into(),
        r.j_trans.into(),
        r.t.into(),
        r.r.into(),
        opt(r.n_trans).into(),
        opt(r.n_ref).into(),
        regime.into(),
    ]);
    let pv_lines = sol.wigner.terms.iter().filter(|t| matches!(t.kind, TermKind::PvLine { .. })).count();
    let result = json!({ "scatter": r, "wigner_terms": sol.wigner.len(), "pv_lines": pv_lines });
    Ok((result, checks, vec![profile, rep]))
}

fn klein(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let (e, m, c, q) = (f(cfg.energy), f(cfg.mass), f(cfg.c), f(cfg.q));
    let v0s = cfg.v0_values();
    let rows = klein_scan(e, m, c, q, &v0s);
    let mut t = Table::new("scan", &["V0", "N_trans", "N_ref", "T", "R", "R_minus_T", "T_signed"]);
    for r in &rows {
        t.push(vec![r.v0.into(), r.n_trans.into(), r.n_ref.into(), r.t.into(), r.r.into(), r.r_minus_t.into(), r.t_signed.into()]);
    }
    let errors: Vec<String> = rows.iter().filter_map(|r| r.error.as_ref().map(|e| format!("V0 = {}: {e}", r.v0))).collect();
    let solved: Vec<_> = rows.iter().filter(|r| r.error.is_none()).collect();
    let dev = solved.iter().map(|r| (r.r_minus_t - 1.0).abs()).fold(0.0, f64::max);
    let checks = vec![
        IdentityCheck::holds("all_heights_in_klein_regime", errors.is_empty()),
        IdentityCheck::within("r_minus_t_equals_one", dev, FLUX_TOL),
        IdentityCheck::holds("transmitted_current_negative", solved.iter().all(|r| r.t_signed < 0.0)),
        IdentityCheck::holds("t_monotone_in_v0", solved.windows(2).all(|w| (w[1].t - w[0].t) * (w[1].v0 - w[0].v0) > 0.0)),
    ];
    let result = json!({
        "rows": rows.len(),
        "n_trans_limit": psqm::scattering::klein_n_trans_limit(e, m, c),
        "errors": errors,
    });
    Ok((result, checks, vec![t]))
}

fn evolve_packet(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let grid = PhaseGrid::with_hbar(
        (f(cfg.x_min), f(cfg.x_max)),
        cfg.n_x.expect("resolved"),
        (f(cfg.p_min), f(cfg.p_max)),
        cfg.n_p.expect("resolved"),
        f(cfg.hbar),
    )?;
    let (mass, c, q) = (f(cfg.mass), f(cfg.c), f(cfg.q));
    let mode = cfg.mode.expect("resolved");
    let spec = match mode {
        Mode::Nonrel => OperatorSpec::Nonrelativistic { mass, potential: cfg.potential(), v00: 1.0, v11: 1.0 },
        Mode::Dirac => {
            OperatorSpec::Dirac { mass, c, charge: q, potential: cfg.potential(), v00: 1.0, v11: 1.0, v01: psqm::C64::new(0.0, 0.0) }
        }
    };
    let h = hamilton_symbol(&spec)?;
    let spinor = cfg.spin.and_then(|s| s.spinor()).expect("resolved");
    let w0 = gaussian_packet(&grid, f(cfg.x0), f(cfg.p0), f(cfg.width), spinor);
    let dt = f(cfg.dt);
    let t_end = f(cfg.t_end);
    let steps = (t_end / dt).round() as usize;
    if (steps as f64 * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(psqm::Error::Argument("t_end must be an integer multiple of dt".into()));
    }
    let every = cfg.sample_every.expect("resolved").max(1);

    // sample frames every `every` steps; around each interior sample keep
    // ±2 neighbouring steps for the time derivative
    let mut samples: Vec<(usize, SymbolField)> = vec![(0, w0.clone())];
    let mut windows: Vec<(usize, Trajectory)> = Vec::new();
    let mut state = w0;
    let mut at = 0usize;
    let advance = |w: &SymbolField, n: usize| -> psqm::Result<SymbolField> {
        if n == 0 {
            return Ok(w.clone());
        }
        let tr = evolve(w, &h, n as f64 * dt, dt, n)?;
        Ok(tr.frames.last().expect("final frame").clone())
    };
    let mut k = every;
    while k <= steps {
        let interior = k + 2 <= steps && k >= at + 2;
        if interior {
            state = advance(&state, k - 2 - at)?;
            let tr = evolve(&state, &h, 4.0 * dt, dt, 1)?;
            samples.push((k, tr.frames[2].clone()));
            state = tr.frames[4].clone();
            at = k + 2;
            windows.push((k, tr));
        } else {
            state = advance(&state, k - at)?;
            at = k;
            samples.push((k, state.clone()));
        }
        k += every;
    }
    if at < steps {
        state = advance(&state, steps - at)?;
        samples.push((steps, state));
    }

    let mut frames = Table::new("frames", &["t", "m", "n", "x", "p", "W"]);
    let mut obs = Table::new("observables", &["t", "norm", "centroid"]);
    let (_, n0) = centroid_and_norm(&samples[0].1);
    let mut drift = 0.0f64;
    for (step_idx, w) in &samples {
        let t = *step_idx as f64 * dt;
        let (xc, n) = centroid_and_norm(w);
        drift = drift.max((n - n0).abs() / n0.abs());
        obs.push(vec![t.into(), n.into(), xc.into()]);
        for pt in InternalPoint::ALL {
            let comp = w.component(pt);
            for kp in 0..grid.n_p {
                for i in 0..grid.n_x {
                    frames.push(vec![
                        t.into(),
                        (pt.m as i64).into(),
                        (pt.n as i64).into(),
                        grid.x(i).into(),
                        grid.p(kp).into(),
                        comp[grid.index(kp, i)].re.into(),
                    ]);
                }
            }
        }
    }
    let mut cont = Table::new("continuity", &["t", "x", "rho", "j", "residual"]);
    let mut worst = 0.0f64;
    for (step_idx, tr) in &windows {
        let t = *step_idx as f64 * dt;
        let res = continuity_residual_profile(tr, tr.times[2])?;
        let j = frame_current(tr, 2)?;
        let rho = tr.frames[2].real_part().total_moment_profile(0);
        let jmax = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (lo, hi) = (grid.n_x / 4, grid.n_x - grid.n_x / 4);
        let r = res[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if jmax > 0.0 {
            worst = worst.max(r / jmax);
        }
        for i in 0..grid.n_x {
            cont.push(vec![t.into(), grid.x(i).into(), rho[i].into(), j[i].into(), res[i].into()]);
        }
    }
    let mut checks = vec![IdentityCheck::within("norm_drift", drift, NORM_DRIFT_TOL)];
    if !windows.is_empty() {
        checks.push(IdentityCheck::within("continuity_residual_over_max_current", worst, CONTINUITY_TOL));
    }
    let result = json!({
        "steps": steps,
        "samples": samples.len(),
        "max_stable_dt": psqm::star::max_stable_dt(&h, &grid),
        "residual_times": windows.iter().map(|(k, _)| *k as f64 * dt).collect::<Vec<_>>(),
    });
    Ok((result, checks, vec![obs, cont, frames]))
}

fn verify(cfg: &RunConfig) -> psqm::Result<Outcome> {
    let seed = cfg.seed.expect("resolved");
    let reports = match cfg.criterion {
        Some(id) => vec![run_one(id, seed).expect("validated id")],
        None => run_all(seed),
    };
    let mut checks = Vec::new();
    let mut detail = Table::new("checks", &["criterion", "name", "value", "tolerance", "pass"]);
    let mut summary = Table::new("criteria", &["criterion", "title", "checks", "pass"]);
    for r in &reports {
        eprintln!("{}", r.line());
        if let Some(b) = r.budget_seconds {
            if r.seconds > b {
                eprintln!("warning: criterion {} took {:.2} s, over its {b} s budget", r.id, r.seconds);
            }
        }
        summary.push(vec![(r.id as i64).into(), r.title.as_str().into(), (r.checks.len() as i64).into(), bool_cell(r.pass())]);
        for c in &r.checks {
            detail.push(vec![(r.id as i64).into(), c.name.as_str().into(), c.value.into(), c.tolerance.into(), bool_cell(c.pass)]);
            checks.push(IdentityCheck { name: format!("c{}/{}", r.id, c.name), ..c.clone() });
        }
    }
    let result = json!({ "seed": seed, "criteria": reports.len() });
    Ok((result, checks, vec![summary, detail]))
}

fn bool_cell(b: bool) -> Cell {
    Cell::Text(if b { "true" } else { "false" }.into())
}
