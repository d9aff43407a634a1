//! Periodic convolution with the kernel by FFT, using exact Fourier multipliers.

use std::sync::Arc;

use faer::Mat;
use nlkpp_core::KernelSpec;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Convolution `(φ * u)(x)` for `u` sampled on `n` uniform points of a period `λ`.
#[derive(Clone)]
pub struct PeriodicConvolver {
    n: usize,
    lambda: f64,
    mult: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicConvolver").field("n", &self.n).field("lambda", &self.lambda).finish()
    }
}

/// Signed frequency index of FFT bin `m`.
pub fn wavenumber_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

impl PeriodicConvolver {
    pub fn new(spec: &KernelSpec, lambda: f64, n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("grid size {n} must be a power of two >= 8")));
        }
        if !(lambda > 0.0) {
            return Err(Error::Grid(format!("period {lambda} must be positive")));
        }
        let mult = (0..n)
            .map(|m| {
                let k = 2.0 * std::f64::consts::PI * wavenumber_index(m, n).unsigned_abs() as f64 / lambda;
                spec.hat_total(k)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self { n, lambda, mult, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Multiplier `φ̂(2πm/λ)` of FFT bin `m`.
    pub fn multiplier(&self, m: usize) -> f64 {
        self.mult[m]
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n, "convolution input has the wrong length");
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (b, m) in buf.iter_mut().zip(&self.mult) {
            *b *= m * scale;
        }
        self.inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// First column `c` of the circulant matrix, `(φ * u)_i = Σ_j c_{i−j} u_j`.
    pub fn stencil(&self) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self.mult.iter().map(|&m| Complex64::new(m / self.n as f64, 0.0)).collect();
        self.inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Dense circulant matrix of the convolution.
    pub fn dense(&self) -> Mat<f64> {
        let c = self.stencil();
        let n = self.n;
        Mat::from_fn(n, n, |i, j| c[(i + n - j) % n])
    }
}

/// Shifts a periodic sample vector by `s` (in units of the period) via Fourier phases.
pub fn fourier_shift(u: &[f64], s: f64) -> Vec<f64> {
    let n = u.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (m, b) in buf.iter_mut().enumerate() {
        let k = wavenumber_index(m, n);
        if n % 2 == 0 && m == n / 2 {
            *b *= (std::f64::consts::PI * n as f64 * s).cos() / n as f64;
        } else {
            *b *= Complex64::from_polar(1.0 / n as f64, 2.0 * std::f64::consts::PI * k as f64 * s);
        }
    }
    inv.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlkpp_core::kernel::{make_kernel, PerturbationKind};

    #[test]
    fn constants_are_preserved() {
        let c = PeriodicConvolver::new(&KernelSpec::top_hat(), 0.9, 64).unwrap();
        for v in c.apply(&[2.0; 64]) {
            assert!((v - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn single_mode_is_scaled_by_the_transform() {
        let k = make_kernel(PerturbationKind::CosPlus, 0.3).unwrap();
        let lambda = 0.8;
        let n = 128;
        let c = PeriodicConvolver::new(&k, lambda, n).unwrap();
        let u: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * 3.0 * i as f64 / n as f64).cos()).collect();
        let m = k.hat_total(2.0 * std::f64::consts::PI * 3.0 / lambda);
        for (a, b) in c.apply(&u).iter().zip(&u) {
            assert!((a - m * b).abs() < 1e-13);
        }
    }

    #[test]
    fn dense_matches_fft() {
        let c = PeriodicConvolver::new(&KernelSpec::top_hat(), 0.7, 32).unwrap();
        let u: Vec<f64> = (0..32).map(|i| ((i * 7) % 5) as f64).collect();
        let d = c.dense();
        let fast = c.apply(&u);
        for i in 0..32 {
            let slow: f64 = (0..32).map(|j| d[(i, j)] * u[j]).sum();
            assert!((slow - fast[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicConvolver::new(&KernelSpec::top_hat(), 0.7, 100).is_err());
        assert!(PeriodicConvolver::new(&KernelSpec::top_hat(), 0.0, 64).is_err());
    }

    #[test]
    fn shift_by_whole_period_is_identity() {
        let u: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        for (a, b) in fourier_shift(&u, 1.0).iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
        let v: Vec<f64> = (0..16).map(|i| (2.0 * std::f64::consts::PI * i as f64 / 16.0).cos()).collect();
        let s = fourier_shift(&v, 0.25);
        assert!((s[0] - 0.0).abs() < 1e-12 && (s[4] + 1.0).abs() < 1e-12);
    }
}
