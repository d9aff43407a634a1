//! Deflated dogleg solves of the periodic steady problem.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dogleg::{dogleg, DoglegOptions, NonlinearSystem};
use crate::error::{Error, Result};
use crate::fpp::{count_peaks, FppProblem};

/// Linear stability class of a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Unknown,
}

/// Converged steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub w: Vec<f64>,
    pub d: f64,
    pub a_w: f64,
    pub lambda: f64,
    pub eps_bar: f64,
    pub n_peaks: usize,
    pub stability: Stability,
    pub max_growth_rate: f64,
    pub residual_norm: f64,
}

impl BranchPoint {
    pub(crate) fn from_solution(p: &FppProblem, w: Vec<f64>, d: f64, residual_norm: f64) -> Self {
        Self {
            a_w: p.a_w(&w),
            n_peaks: count_peaks(&w),
            lambda: p.lambda,
            eps_bar: p.spec.eps_bar(),
            d,
            w,
            stability: Stability::Unknown,
            max_growth_rate: f64::NAN,
            residual_norm,
        }
    }

    pub fn u(&self) -> Vec<f64> {
        self.w.iter().map(|v| v.exp()).collect()
    }

    /// `(log₁₀ D, log₁₀(−A_W))`; fails for states with `A_W ≥ 0`.
    pub fn plane(&self) -> Result<(f64, f64)> {
        if !(self.a_w < 0.0) {
            return Err(Error::InvalidState(format!("A_W = {:.3e} is not negative", self.a_w)));
        }
        Ok((self.d.log10(), (-self.a_w).log10()))
    }
}

/// Options for [`solve_fpp`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub dogleg: DoglegOptions,
    /// Divide by `tanh(|W|²/N)` to repel the `u ≡ 1` root.
    pub deflate_trivial: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { dogleg: DoglegOptions { ftol: 1e-9, max_iter: 200, ..Default::default() }, deflate_trivial: true }
    }
}

/// Distance below which a solution counts as one of the deflated roots.
pub const DEFLATION_TOL: f64 = 1e-6;

/// Deflated residual at which the undeflated polish takes over.
const POLISH_FROM: f64 = 1e-6;

struct Deflated<'a> {
    p: &'a FppProblem,
    d: f64,
    known: &'a [Vec<f64>],
    trivial: bool,
}

impl Deflated<'_> {
    /// `M(W)` and `∇ log M(W)`.
    fn factor(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = w.len() as f64;
        let mut m = 1.0;
        let mut g = vec![0.0; w.len()];
        let mut add = |diff: &dyn Fn(usize) -> f64| {
            let s: f64 = (0..w.len()).map(|i| diff(i).powi(2)).sum::<f64>() / n;
            m /= s.tanh();
            let c = -2.0 / (2.0 * s).sinh() * 2.0 / n;
            if c.is_finite() {
                for (i, gi) in g.iter_mut().enumerate() {
                    *gi += c * diff(i);
                }
            }
        };
        if self.trivial {
            add(&|i| w[i]);
        }
        for k in self.known {
            add(&|i| w[i] - k[i]);
        }
        (m, g)
    }
}

impl NonlinearSystem for Deflated<'_> {
    fn residual(&mut self, w: &[f64]) -> Result<Vec<f64>> {
        let f = self.p.residual(w, self.d)?;
        let (m, _) = self.factor(w);
        Ok(f.into_iter().map(|v| m * v).collect())
    }

    fn jacobian(&mut self, w: &[f64]) -> Result<Mat<f64>> {
        let f = self.p.residual(w, self.d)?;
        let mut j = self.p.jacobian(w, self.d)?;
        let (m, g) = self.factor(w);
        let n = w.len();
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] = m * (j[(r, c)] + f[r] * g[c]);
            }
        }
        Ok(j)
    }
}

/// Solves the steady problem from `seed`, deflating the trivial root (optionally)
/// and each state in `deflate_against`.
pub fn solve_fpp(
    p: &FppProblem,
    seed: &[f64],
    d: f64,
    deflate_against: &[Vec<f64>],
    opts: &SolveOptions,
) -> Result<BranchPoint> {
    if seed.len() != p.n || seed.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState("seed must be finite and match the grid".into()));
    }
    let deflating = opts.deflate_trivial || !deflate_against.is_empty();
    let coarse = if deflating {
        // the deflation factor amplifies round-off, so the deflated solve only
        // has to land near a root; the undeflated polish finishes it
        let loose = DoglegOptions { ftol: opts.dogleg.ftol.max(POLISH_FROM), ..opts.dogleg };
        let mut sys = Deflated { p, d, known: deflate_against, trivial: opts.deflate_trivial };
        dogleg(&mut sys, seed, &loose)?.x
    } else {
        seed.to_vec()
    };
    let mut sys = Deflated { p, d, known: &[], trivial: false };
    let rep = dogleg(&mut sys, &coarse, &opts.dogleg)?;
    let rms = |a: &[f64], b: &[f64]| {
        (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
    };
    for k in deflate_against {
        let distance = rms(&rep.x, k);
        if distance < DEFLATION_TOL {
            return Err(Error::ConvergedToDeflated { distance });
        }
    }
    let residual = p.residual(&rep.x, d)?;
    let rmax = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if rmax >= opts.dogleg.ftol {
        return Err(Error::NonConvergence(format!("unscaled residual {rmax:.3e}")));
    }
    Ok(BranchPoint::from_solution(p, rep.x, d, rmax))
}

/// `log` of a positive profile, floored so the result stays finite.
pub fn log_profile(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v.max(1e-300).ln()).collect()
}
