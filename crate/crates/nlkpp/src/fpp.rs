//! Residual and Jacobian of the periodic steady problem in `W = log u`:
//! `D(W'' + W'²) + 1 − φ * e^W = 0` on one period.

use faer::Mat;
use nlkpp_core::KernelSpec;

use crate::error::{Error, Result};
use crate::spectral::PeriodicConvolver;

/// Largest admissible `W` before `e^W` is treated as divergence.
pub const W_GUARD: f64 = 50.0;

/// Smallest grid accepted for steady solves.
pub const MIN_GRID: usize = 256;

/// Discretised steady problem on one period.
#[derive(Debug, Clone)]
pub struct FppProblem {
    pub spec: KernelSpec,
    pub lambda: f64,
    pub n: usize,
    pub h: f64,
    pub conv: PeriodicConvolver,
}

/// Fourth-order five-point periodic first derivative.
pub fn d1(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len();
    (0..n)
        .map(|i| {
            let (m2, m1, p1, p2) = ((i + n - 2) % n, (i + n - 1) % n, (i + 1) % n, (i + 2) % n);
            (-w[p2] + 8.0 * w[p1] - 8.0 * w[m1] + w[m2]) / (12.0 * h)
        })
        .collect()
}

/// Fourth-order five-point periodic second derivative.
pub fn d2(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len();
    (0..n)
        .map(|i| {
            let (m2, m1, p1, p2) = ((i + n - 2) % n, (i + n - 1) % n, (i + 1) % n, (i + 2) % n);
            (-w[p2] + 16.0 * w[p1] - 30.0 * w[i] + 16.0 * w[m1] - w[m2]) / (12.0 * h * h)
        })
        .collect()
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

impl FppProblem {
    pub fn new(spec: &KernelSpec, lambda: f64, n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::Grid(format!("steady grid {n} is below {MIN_GRID}")));
        }
        let conv = PeriodicConvolver::new(spec, lambda, n)?;
        Ok(Self { spec: spec.clone(), lambda, n, h: lambda / n as f64, conv })
    }

    /// Grid nodes `x_i = iλ/n`.
    pub fn x(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.h).collect()
    }

    fn guard(&self, w: &[f64]) -> Result<()> {
        let max_w = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max_w > W_GUARD || !max_w.is_finite() {
            return Err(Error::OverflowGuard { max_w });
        }
        Ok(())
    }

    /// `W'' + W'²`, the derivative of the residual with respect to `D`.
    pub fn diffusive_part(&self, w: &[f64]) -> Vec<f64> {
        let w1 = d1(w, self.h);
        d2(w, self.h).iter().zip(&w1).map(|(a, b)| a + b * b).collect()
    }

    /// `φ * e^W`.
    pub fn nonlocal(&self, w: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = w.iter().map(|v| v.exp()).collect();
        self.conv.apply(&u)
    }

    pub fn residual(&self, w: &[f64], d: f64) -> Result<Vec<f64>> {
        self.guard(w)?;
        let diff = self.diffusive_part(w);
        let nl = self.nonlocal(w);
        Ok(diff.iter().zip(&nl).map(|(a, c)| d * a + 1.0 - c).collect())
    }

    /// Dense Jacobian `D(L₂ + 2 diag(W') L₁) − C diag(e^W)`.
    pub fn jacobian(&self, w: &[f64], d: f64) -> Result<Mat<f64>> {
        self.guard(w)?;
        let n = self.n;
        let c = self.conv.stencil();
        let u: Vec<f64> = w.iter().map(|v| v.exp()).collect();
        let mut j = Mat::from_fn(n, n, |i, k| -c[(i + n - k) % n] * u[k]);
        let w1 = d1(w, self.h);
        let (s1, s2) = (1.0 / (12.0 * self.h), 1.0 / (12.0 * self.h * self.h));
        for i in 0..n {
            for (o, (a1, a2)) in D1.iter().zip(&D2).enumerate() {
                let k = (i + n + o - 2) % n;
                j[(i, k)] += d * (a2 * s2 + 2.0 * w1[i] * a1 * s1);
            }
        }
        Ok(j)
    }

    /// Jacobian applied to `v` without forming the matrix.
    pub fn jacobian_action(&self, w: &[f64], d: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.guard(w)?;
        let w1 = d1(w, self.h);
        let v1 = d1(v, self.h);
        let v2 = d2(v, self.h);
        let uv: Vec<f64> = w.iter().zip(v).map(|(a, b)| a.exp() * b).collect();
        let cv = self.conv.apply(&uv);
        Ok((0..self.n).map(|i| d * (v2[i] + 2.0 * w1[i] * v1[i]) - cv[i]).collect())
    }

    /// `A_W = ∫₀^λ W` by the (spectrally accurate) periodic trapezoid rule.
    pub fn a_w(&self, w: &[f64]) -> f64 {
        self.h * w.iter().sum::<f64>()
    }
}

/// Count of strict local maxima of a periodic sample vector.
pub fn count_peaks(w: &[f64]) -> usize {
    let n = w.len();
    (0..n).filter(|&i| w[i] > w[(i + n - 1) % n] && w[i] > w[(i + 1) % n]).count()
}

/// Largest `|W(x_i) − W(x_{−i})|` about the node `0`.
pub fn asymmetry(w: &[f64]) -> f64 {
    let n = w.len();
    (1..n).map(|i| (w[i] - w[n - i]).abs()).fold(0.0, f64::max)
}
