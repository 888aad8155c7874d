use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use psqm::continuity::{damped_moment, exact_moment, regularized_moment, RegularizationPolicy};
use psqm::quantizer::{discrete_quantizer, matrix_to_symbol, symbol_to_matrix};
use psqm::scattering::{klein_scan, solve_step_nonrel, ScatterConfig};
use psqm::special::sici;
use psqm::star::star_discrete;
use psqm::{InternalPoint, TermRole};

fn symbol() -> impl Strategy<Value = [C64; 4]> {
    prop::array::uniform4((-3.0..3.0f64, -3.0..3.0f64)).prop_map(|v| v.map(|(a, b)| C64::new(a, b)))
}

fn close(a: &[C64; 4], b: &[C64; 4], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).norm() <= tol)
}

proptest! {
    #[test]
    fn round_trip(f in symbol()) {
        let back = matrix_to_symbol(&symbol_to_matrix(&f));
        prop_assert!(close(&back, &f, 1e-13));
    }

    #[test]
    fn discrete_star_associative(f in symbol(), g in symbol(), h in symbol()) {
        let left = star_discrete(&star_discrete(&f, &g), &h);
        let right = star_discrete(&f, &star_discrete(&g, &h));
        prop_assert!(close(&left, &right, 1e-11));
    }

    #[test]
    fn discrete_star_is_matrix_product(f in symbol(), g in symbol()) {
        let prod = symbol_to_matrix(&f) * symbol_to_matrix(&g);
        prop_assert!(close(&star_discrete(&f, &g), &matrix_to_symbol(&prod), 1e-12));
    }

    #[test]
    fn real_symbols_star_conjugates(a in prop::array::uniform4(-2.0..2.0f64), b in prop::array::uniform4(-2.0..2.0f64)) {
        let f = a.map(C64::from);
        let g = b.map(C64::from);
        let fg = star_discrete(&f, &g).map(|z| z.conj());
        prop_assert!(close(&fg, &star_discrete(&g, &f), 1e-13));
    }

    #[test]
    fn step_flux_balance(e in 0.01..100.0f64, frac in 0.0..0.999f64, m in 0.05..20.0f64) {
        let r = solve_step_nonrel(&ScatterConfig::nonrel(e, e * frac, m)).unwrap().report;
        prop_assert!((r.t + r.r - 1.0).abs() < 1e-12);
        prop_assert!(r.t > 0.0 && r.r >= 0.0);
    }

    #[test]
    fn klein_flux_balance(e in 1.05..10.0f64, extra in 0.0..1e3f64) {
        let v0 = e + 1.0 + extra;
        let row = &klein_scan(e, 1.0, 1.0, 1.0, &[v0])[0];
        prop_assert!(row.error.is_none());
        prop_assert!((row.r_minus_t - 1.0).abs() < 1e-10 * row.r.max(1.0));
        prop_assert!(row.t_signed < 0.0);
    }
}

#[test]
fn sine_cosine_integrals() {
    for (x, si, ci) in [
        (0.5, 0.4931074180430667, -0.17778407880661290),
        (1.0, 0.9460830703671830, 0.3374039229009681),
        (10.0, 1.658347594218874, -0.04545643300445537),
        (40.0, 1.586985119354784, 0.01902000789620877),
    ] {
        let (s, c) = sici(x);
        assert!((s - si).abs() < 1e-14, "Si({x}) = {s}");
        assert!((c - ci).abs() < 1e-14, "Ci({x}) = {c}");
    }
}

/// Composite Simpson on [0, l] and [−l, 0] so the kink of e^{−α|p|} sits on a node.
fn simpson_line(f: impl Fn(f64) -> f64, l: f64, n: usize) -> f64 {
    let h = l / n as f64;
    let half = |s: f64| {
        let mut acc = f(0.0) + f(s * l);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(s * k as f64 * h);
        }
        acc * h / 3.0
    };
    half(1.0) + half(-1.0)
}

#[test]
fn damped_pv_moment_under_halving() {
    // transmitted part of a step solution: ½·sin(2x(p − p̃))/(π(p − p̃)) on the (0, 1) component
    let sol = solve_step_nonrel(&ScatterConfig::nonrel(1.0, 0.5, 1.0)).unwrap();
    let pt = sol.report.p_tilde;
    let dw = sol.wigner.with_role(TermRole::Direct(2)).component(InternalPoint::new(0, 1).unwrap());
    let x = 0.7;
    let mut errs = Vec::new();
    for alpha in [0.4, 0.2, 0.1, 0.05] {
        let l = 40.0 / alpha;
        let quad = simpson_line(
            |p| {
                let q = p - pt;
                let s = if q == 0.0 { 2.0 * x } else { (2.0 * x * q).sin() / q };
                (-alpha * p.abs()).exp() * 0.5 * s / PI
            },
            l,
            (l / 0.004) as usize * 2,
        );
        let got = damped_moment(&dw, 0, x, alpha);
        assert!((got - quad).abs() < 1e-9, "α = {alpha}: {got} vs {quad}");
        errs.push((got - 0.5).abs());
    }
    // the α → 0 limit is the Dirichlet integral ½; the error shrinks at every halving
    assert!(errs.windows(2).all(|e| e[1] < e[0]), "{errs:?}");
    let limit = regularized_moment(&dw, 0, x, &RegularizationPolicy::default()).unwrap();
    assert!((limit - 0.5).abs() < 1e-10);
    assert!((exact_moment(&dw, 0, x).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn frame_is_orthogonal() {
    // Tr Ω = 1 and Tr(Ω_a Ω_b) = 2δ_ab
    for a in InternalPoint::ALL {
        let oa = discrete_quantizer(a);
        assert_eq!(oa.trace(), C64::new(1.0, 0.0));
        for b in InternalPoint::ALL {
            let want = if a == b { 2.0 } else { 0.0 };
            assert_eq!((oa * discrete_quantizer(b)).trace(), C64::new(want, 0.0));
        }
    }
}
