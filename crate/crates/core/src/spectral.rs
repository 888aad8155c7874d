//! FFT helpers for periodic, decaying samples.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transform pair of one length; the inverse is normalized.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

/// Angular frequencies 2πk/(n·h) in FFT order; the Nyquist bin (even n)
/// gets frequency 0 so that odd derivatives and shifts of real data stay real.
pub fn frequencies(n: usize, h: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|k| {
            if 2 * k == n {
                0.0
            } else if 2 * k < n {
                k as f64 * base
            } else {
                (k as f64 - n as f64) * base
            }
        })
        .collect()
}

/// In-place multiplication of the spectrum by `mult(frequency)`.
pub fn apply_multiplier(fft: &FftPair, h: f64, data: &mut [C64], mult: impl Fn(f64) -> C64) {
    fft.forward(data);
    for (v, w) in data.iter_mut().zip(frequencies(fft.len(), h)) {
        *v *= mult(w);
    }
    fft.inverse(data);
}

/// d^order/dx^order of periodic samples spaced `h`.
pub fn derivative(fft: &FftPair, h: f64, data: &mut [C64], order: u32) {
    let n = fft.len();
    let nyquist = if n.is_multiple_of(2) { Some(n / 2) } else { None };
    fft.forward(data);
    for (k, (v, w)) in data.iter_mut().zip(frequencies(n, h)).enumerate() {
        if Some(k) == nyquist {
            // keep the even-derivative Nyquist term, drop the odd one
            let wn = PI / h;
            *v *= if order.is_multiple_of(2) { C64::from((-(wn * wn)).powi(order as i32 / 2)) } else { C64::new(0.0, 0.0) };
        } else {
            *v *= C64::new(0.0, w).powu(order);
        }
    }
    fft.inverse(data);
}

/// Replace samples f(x_j) by f(x_j + delta).
pub fn shift(fft: &FftPair, h: f64, data: &mut [C64], delta: f64) {
    apply_multiplier(fft, h, data, |w| C64::from_polar(1.0, w * delta));
}

/// Interleave samples with spectrally interpolated midpoints: the result has
/// 2n − 1 entries at spacing h/2 covering the original span.
pub fn refine_by_two(data: &[C64]) -> Vec<C64> {
    let n = data.len();
    let fft = FftPair::new(n);
    let mut mid = data.to_vec();
    shift(&fft, 1.0, &mut mid, 0.5);
    let mut out = Vec::with_capacity(2 * n - 1);
    for j in 0..n {
        out.push(data[j]);
        if j + 1 < n {
            out.push(mid[j]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, h: f64, x0: f64) -> Vec<C64> {
        (0..n).map(|j| C64::from((-(j as f64 * h - x0).powi(2)).exp())).collect()
    }

    #[test]
    fn derivative_of_gaussian() {
        let (n, h, x0) = (128, 0.15, 9.6);
        let fft = FftPair::new(n);
        let mut d = gaussian(n, h, x0);
        derivative(&fft, h, &mut d, 1);
        for (j, v) in d.iter().enumerate() {
            let x = j as f64 * h - x0;
            assert!((v.re + 2.0 * x * (-x * x).exp()).abs() < 1e-12);
        }
        let mut d2 = gaussian(n, h, x0);
        derivative(&fft, h, &mut d2, 2);
        for (j, v) in d2.iter().enumerate() {
            let x = j as f64 * h - x0;
            assert!((v.re - (4.0 * x * x - 2.0) * (-x * x).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn midpoint_refinement() {
        let (n, h, x0) = (100, 0.2, 10.0);
        let fine = refine_by_two(&gaussian(n, h, x0));
        assert_eq!(fine.len(), 2 * n - 1);
        for (j, v) in fine.iter().enumerate() {
            let x = j as f64 * 0.5 * h - x0;
            assert!((v.re - (-x * x).exp()).abs() < 1e-12);
        }
    }
}
