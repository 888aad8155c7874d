use psqm::continuity::{
    current, current_dirac, current_nonrel, exact_moment, oracle_current_wavefunction, spatial_density, CurrentMode, RegularizationPolicy,
    WignerRef,
};
use psqm::scattering::{solve_step_dirac, solve_step_nonrel, ScatterConfig};

#[test]
fn nonrel_step_currents_from_phase_space() {
    let policy = RegularizationPolicy::default();
    for (e, v0, m) in [(1.0, 0.5, 1.0), (2.0, 1.0, 0.7), (3.5, 0.2, 2.0), (1.0, 0.99, 1.0)] {
        let s = solve_step_nonrel(&ScatterConfig::nonrel(e, v0, m)).unwrap();
        let r = s.report;
        let w = WignerRef::Exact(&s.wigner, &policy);
        for x in [-3.7, -1.0, -0.25] {
            let j = current_nonrel(w, m, x).unwrap();
            let want = r.j_inc + r.j_ref;
            assert!((j - want).abs() < 1e-10, "E={e} V0={v0} x={x}: {j} vs {want}");
            let oracle = oracle_current_wavefunction(&s.state, x, CurrentMode::Nonrel { mass: m }).unwrap();
            assert!((oracle - want).abs() < 1e-13);
            let rho = spatial_density(w, x).unwrap();
            let psi = s.state.value(x).unwrap();
            let want_rho = psi[0].norm_sqr() + psi[1].norm_sqr();
            assert!((rho - want_rho).abs() < 1e-10, "density {rho} vs {want_rho}");
        }
        for x in [0.3, 2.0, 11.0] {
            let j = current_nonrel(w, m, x).unwrap();
            assert!((j - r.j_trans).abs() < 1e-10, "x={x}: {j} vs {}", r.j_trans);
            let ex = exact_moment(&s.wigner, 1, x).unwrap() / m;
            assert!((ex - r.j_trans).abs() < 1e-12);
        }
    }
}

#[test]
fn dirac_step_currents_from_phase_space() {
    let policy = RegularizationPolicy::default();
    for v0 in [3.5, 5.0, 12.0, -1.0] {
        let s = solve_step_dirac(&ScatterConfig::dirac(2.0, v0, 1.0, 1.0, 1.0)).unwrap();
        let r = s.report;
        let w = WignerRef::Exact(&s.wigner, &policy);
        let mode = CurrentMode::Dirac { mass: 1.0, q: 1.0, c: 1.0 };
        for x in [-2.0, -0.4] {
            let j = current_dirac(w, 1.0, 1.0, x).unwrap();
            assert!((j - (r.j_inc + r.j_ref)).abs() < 1e-10, "V0={v0} x={x}: {j} vs {}", r.j_inc + r.j_ref);
            let oracle = oracle_current_wavefunction(&s.state, x, mode).unwrap();
            assert!((oracle - (r.j_inc + r.j_ref)).abs() < 1e-12);
        }
        for x in [0.4, 3.0] {
            let j = current(w, mode, x).unwrap();
            assert!((j - r.j_trans).abs() < 1e-10, "V0={v0} x={x}: {j} vs {}", r.j_trans);
        }
    }
}
