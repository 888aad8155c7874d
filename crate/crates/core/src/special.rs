//! Exponential integral of complex argument and the principal-value
//! Laplace integrals built from it.

use num_complex::Complex64 as C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// e^z · E1(z) on the principal branch (cut along the negative real axis).
///
/// A power series is used near the origin and close to the negative real
/// axis, where it suffers no cancellation; elsewhere the continued fraction
/// of e^z·E1(z) is evaluated with the modified Lentz method.
pub fn exp_e1(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return C64::new(f64::INFINITY, 0.0);
    }
    let near_cut = z.re < 0.0 && r + z.re < 3.0 && r < 700.0;
    if r < 4.0 || near_cut {
        z.exp() * e1_series(z)
    } else {
        exp_e1_fraction(z)
    }
}

fn e1_series(z: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    for k in 1..2000 {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn exp_e1_fraction(z: C64) -> C64 {
    const TINY: f64 = 1e-300;
    let guard = |v: C64| if v.norm() < TINY { C64::new(TINY, 0.0) } else { v };
    let mut f = guard(z + 1.0);
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for j in 1..100_000 {
        let a = -((j * j) as f64);
        let b = z + (2 * j + 1) as f64;
        d = guard(b + a * d).inv();
        c = guard(b + a / c);
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    f.inv()
}

/// PV ∫₀^∞ e^{−s·u}/(u − c) du for Re s > 0 and real c ≠ 0.
pub fn pv_laplace(s: C64, c: f64) -> C64 {
    let z = -s * c;
    let base = exp_e1(z);
    if c < 0.0 {
        return base;
    }
    if z.im == 0.0 {
        // the pole sits on the integration path with no oscillation:
        // the principal value is the mean of the two boundary values
        C64::new(base.re, 0.0)
    } else {
        base + z.exp() * C64::new(0.0, std::f64::consts::PI * z.im.signum())
    }
}

/// Sine and cosine integrals (Si(x), Ci(x)) for x > 0.
pub fn sici(x: f64) -> (f64, f64) {
    let z = C64::new(0.0, x);
    let e1 = (-z).exp() * exp_e1(z);
    (e1.im + std::f64::consts::FRAC_PI_2, -e1.re)
}
