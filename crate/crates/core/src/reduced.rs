//! Reduced steady-state problems of the small-perturbation theory.
//!
//! With `D = D̄ ‖φ̄‖₁ᵐ` and core half-width `a = (λ − 1/2)/2`, the periodic
//! state on `[−a, a]` is the principal eigenfunction of `[SL(I, a)]` with the
//! potential coefficients fixed by `D̄⁻¹ diag(χ) G(I, a) = I`.

use alloc::vec::Vec;
use libm::{cbrt, cos, fabs, sin, sqrt};

use crate::airy::AiryConstants;
use crate::kernel::KernelSpec;
use crate::quad::{simpson, GaussLegendre};
use crate::roots::{bisect, brent};
use crate::sturm_liouville::{
    g_unperturbed, solve_cosine_potential, solve_sl, SlProblem, SlSolution, Structure, DEFAULT_GRID,
};
use crate::{Error, Result, PI};

/// Sign of the normalised cosine perturbation `±(π/2) cos 2πx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// Kernel weight moved towards the centre.
    Plus,
    /// Kernel weight moved towards the edges.
    Minus,
}

impl Sign {
    /// `+1` or `−1`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Which solution family a reduced state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchTag {
    /// Continuation of the large-`D̄` state.
    Principal,
    /// Any other branch.
    Secondary(u32),
}

/// Converged reduced state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    /// Core half-width.
    pub a: f64,
    /// Scaled diffusivity.
    pub d_bar: f64,
    /// Potential coefficients `I`.
    pub i_vector: Vec<f64>,
    /// `𝓘 = α_L + χ₀ / (2D̄)`.
    pub script_i: f64,
    /// Core profile.
    pub sl: SlSolution,
    /// Centre classification.
    pub structure: Structure,
    /// Branch label.
    pub branch_tag: BranchTag,
    /// Final fixed-point residual in `l¹`.
    pub residual: f64,
    /// Size `|χ_N| / D̄` of the last retained coefficient.
    pub truncation_tail: f64,
}

/// `x = a` core half-width for wavelength `λ`.
pub fn core_halfwidth(lambda: f64) -> f64 {
    0.5 * (lambda - 0.5)
}

fn g1(i: f64, a: f64) -> Result<f64> {
    Ok(solve_cosine_potential(a, &[i], DEFAULT_GRID)?.g[0])
}

/// Bracket `(½πD̄⁻¹ cos 2πa, ½πD̄⁻¹)` for `±I`.
pub fn scalar_bracket(a: f64, d_bar: f64) -> (f64, f64) {
    let top = 0.5 * PI / d_bar;
    (top * cos(2.0 * PI * a), top)
}

/// Solves `G₁(I, a) = ±(2/π) D̄ I`.
///
/// Both signs have `h(I) = G₁ ∓ (2/π)D̄I` changing sign across the bracket.
/// For `+` the root is unique; for `−` the root found is the principal one
/// whenever `𝒥₋ > 0`, which [`jacobian`] lets callers confirm.
pub fn solve_scalar_fixedpoint(sign: Sign, a: f64, d_bar: f64) -> Result<ReducedState> {
    if !(a > 0.0 && a < 0.25) {
        return Err(Error::Domain("half-width must lie in (0, 1/4)"));
    }
    if !(d_bar > 0.0) {
        return Err(Error::Domain("scaled diffusivity must be positive"));
    }
    let i = scalar_root(sign, a, d_bar)?;
    let sl = solve_sl(&SlProblem::scalar(a, i))?;
    let residual = fabs(sign.value() * 0.5 * PI * sl.g[0] / d_bar - i);
    Ok(ReducedState {
        a,
        d_bar,
        i_vector: alloc::vec![i],
        script_i: sl.alpha_l,
        structure: sl.structure,
        sl,
        branch_tag: BranchTag::Principal,
        residual,
        truncation_tail: 0.0,
    })
}

fn scalar_root(sign: Sign, a: f64, d_bar: f64) -> Result<f64> {
    let (lo, hi) = scalar_bracket(a, d_bar);
    let s = sign.value();
    let slope = 2.0 / PI * d_bar;
    let h = |i: f64| g1(i, a).map(|g| g - s * slope * i).unwrap_or(f64::NAN);
    let (x0, x1) = if s > 0.0 { (lo, hi) } else { (-hi, -lo) };
    brent(h, x0, x1, 1e-13 * hi)
}

/// `I⁺(a, D̄)` or `I⁻(a, D̄)`.
pub fn scalar_i(sign: Sign, a: f64, d_bar: f64) -> Result<f64> {
    scalar_root(sign, a, d_bar)
}

/// `𝒥± = (G₁)_I ∓ (2/π) D̄` at `(a, I, D̄)` by a central difference.
pub fn jacobian(sign: Sign, a: f64, i: f64, d_bar: f64) -> Result<f64> {
    let h = 1e-4 * (1.0 + fabs(i));
    let gi = (g1(i + h, a)? - g1(i - h, a)?) / (2.0 * h);
    Ok(gi - sign.value() * 2.0 / PI * d_bar)
}

/// Damped fixed-point iteration for the truncated system.
pub fn solve_truncated_fixedpoint(spec: &KernelSpec, a: f64, d_bar: f64, n_modes: usize) -> Result<ReducedState> {
    if !(a > 0.0 && a < 0.25) {
        return Err(Error::Domain("half-width must lie in (0, 1/4)"));
    }
    if !(d_bar > 0.0) || n_modes == 0 {
        return Err(Error::Domain("need D̄ > 0 and at least one mode"));
    }
    let chi = spec.chi(n_modes);
    let map = |iv: &[f64]| -> Result<(Vec<f64>, SlSolution)> {
        let sl = solve_cosine_potential(a, iv, DEFAULT_GRID)?;
        let out = (0..n_modes).map(|r| chi[r + 1] * sl.g[r] / d_bar).collect();
        Ok((out, sl))
    };
    let mut iv: Vec<f64> = (0..n_modes).map(|r| chi[r + 1] * g_unperturbed(a, r + 1) / d_bar).collect();
    let l1 = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| fabs(p - q)).sum::<f64>();
    let (mut img, mut sl) = map(&iv)?;
    let mut res = l1(&img, &iv);
    let mut theta = 0.5;
    let scale = chi.iter().map(|c| fabs(*c)).sum::<f64>() / d_bar;
    for _ in 0..10_000 {
        if res < 1e-10 * scale.max(1.0) {
            let structure = sl.structure;
            return Ok(ReducedState {
                a,
                d_bar,
                script_i: sl.alpha_l + chi[0] / (2.0 * d_bar),
                i_vector: iv,
                sl,
                structure,
                branch_tag: BranchTag::Principal,
                residual: res,
                truncation_tail: fabs(chi[n_modes]) / d_bar,
            });
        }
        let trial: Vec<f64> = iv.iter().zip(&img).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
        let (timg, tsl) = map(&trial)?;
        let tres = l1(&timg, &trial);
        if tres > res {
            theta *= 0.5;
            if theta < 1e-6 {
                return Err(Error::Convergence("damping underflow in truncated fixed point"));
            }
        } else {
            theta = (theta * 1.25).min(1.0);
        }
        iv = trial;
        img = timg;
        sl = tsl;
        res = tres;
    }
    Err(Error::Convergence("truncated fixed point: 10^4 iterations"))
}

/// `I*(D̄)`: root of `ḡ₁(Y) = (2/π) D̄ Y` with `ḡ₁(Y) = G₁(Y, 1/4)`.
pub fn i_star(d_bar: f64) -> Result<f64> {
    let hi = 0.5 * PI / d_bar;
    let h = |y: f64| g1(y, 0.25).map(|g| g - 2.0 / PI * d_bar * y).unwrap_or(f64::NAN);
    brent(h, 0.0, hi, 1e-13 * hi)
}

/// `D̄*`: root of `ᾱ(I*(D̄)) = I*(D̄)`, with `ᾱ(I) = α_L(I, 1/4)`.
pub fn d_star() -> Result<f64> {
    let f = |ld: f64| {
        let d = libm::exp(ld);
        i_star(d)
            .and_then(|i| solve_cosine_potential(0.25, &[i], DEFAULT_GRID).map(|s| s.alpha_l - i))
            .unwrap_or(f64::NAN)
    };
    let ld = bisect(f, libm::log(1e-4), libm::log(1e-1), 1e-12)?;
    Ok(libm::exp(ld))
}

/// `α_L(I⁺(Z, D̄), Z) − I⁺(Z, D̄)`; changes sign at `Z = a_c(D̄)`.
pub fn hump_margin(z: f64, d_bar: f64) -> Result<f64> {
    let i = scalar_root(Sign::Plus, z, d_bar)?;
    Ok(solve_cosine_potential(z, &[i], DEFAULT_GRID)?.alpha_l - i)
}

/// `a_c(D̄)` for `D̄ < D̄*`, given `D̄*`.
pub fn a_c(d_bar: f64, d_star: f64) -> Result<f64> {
    if !(d_bar > 0.0) || d_bar >= d_star {
        return Err(Error::Range("a_c is defined only for 0 < D̄ < D̄*"));
    }
    let f = |z: f64| hump_margin(z, d_bar).unwrap_or(f64::NAN);
    let hi = 0.25 - 1e-9;
    if f(hi) >= 0.0 {
        // at D̄ just below D̄* the crossing sits within 1e-9 of 1/4
        return Ok(0.25);
    }
    bisect(f, 1e-4, hi, 1e-12)
}

/// `D̄*` and `a_c` sampled on a `D̄` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalCurves {
    /// Terminal diffusivity of the hump-splitting boundary.
    pub d_star: f64,
    /// `D̄` samples (all below `D̄*`).
    pub d_bar: Vec<f64>,
    /// `a_c(D̄)` at each sample.
    pub a_c: Vec<f64>,
}

/// `D̄*` and `a_c(D̄)` on `d_bar_grid`; only the `+` perturbation has them.
pub fn critical_curves(sign: Sign, d_bar_grid: &[f64]) -> Result<CriticalCurves> {
    if sign == Sign::Minus {
        return Err(Error::Range("the minus perturbation has no hump-splitting curve"));
    }
    let ds = d_star()?;
    let a = d_bar_grid.iter().map(|&d| a_c(d, ds)).collect::<Result<Vec<_>>>()?;
    Ok(CriticalCurves { d_star: ds, d_bar: d_bar_grid.to_vec(), a_c: a })
}

/// Root `ψ(â)` of `ψ = π² â⁴ (1 + c_i ψ^{−1/3})`.
pub fn psi(a_hat: f64) -> Result<f64> {
    if !(a_hat > 0.0) {
        return Err(Error::Domain("psi needs a positive argument"));
    }
    let ci = AiryConstants::compute().c_i;
    let b = PI * PI * a_hat * a_hat * a_hat * a_hat;
    let g = |p: f64| p - b * (1.0 + ci / cbrt(p));
    let lo = b.max(1e-300);
    let mut hi = 2.0 * lo + 2.0 * libm::pow(b * ci, 0.75);
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    brent(g, lo, hi, 1e-15 * hi)
}

/// Small-`D̄` approximation of `I⁺` near `a = 1/4`: `â⁻³ ψ(â) D̄^{−3/4}`.
pub fn i_plus_near_quarter(a: f64, d_bar: f64) -> Result<f64> {
    let a_hat = (0.25 - a) / sqrt(sqrt(d_bar));
    Ok(psi(a_hat)? / (a_hat * a_hat * a_hat) / libm::pow(d_bar, 0.75))
}

/// Regular-regime correction `F̄` on the core.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionProfile {
    /// Wavelength.
    pub lambda: f64,
    /// Core half-width `a = (λ − 1/2)/2`.
    pub a: f64,
    /// Nodes on `[0, a]`.
    pub x_half: Vec<f64>,
    /// `F̄` at `x_half` (even in `x`).
    pub fbar_half: Vec<f64>,
    /// Constant `A` multiplying `cos(πx/2a)`.
    pub a_coeff: f64,
    /// `ᾱ`.
    pub alpha_bar: f64,
    /// `Ī` at `x_half`.
    pub ibar_half: Vec<f64>,
}

impl CorrectionProfile {
    /// `∫_{−a}^{a} F̄` by Simpson's rule.
    pub fn integral(&self) -> f64 {
        let h = self.a / (self.x_half.len() - 1) as f64;
        2.0 * simpson(&self.fbar_half, h)
    }

    /// `max |F̄|`.
    pub fn sup_norm(&self) -> f64 {
        self.fbar_half.iter().fold(0.0, |m, v| m.max(fabs(*v)))
    }
}

/// Solves the linear correction problem
/// `F̄'' + (π²/4a²) F̄ = H`, `F̄(±a) = 0`, `F̄` even, `∫F̄ = 0`.
///
/// The zero-mass constraint fixes `A = −(π/2a) ∫₀^a Ψ`.
pub fn bvp_correction(spec: &KernelSpec, lambda: f64, n: usize) -> Result<CorrectionProfile> {
    if !(lambda > 0.5 && lambda < 1.0) {
        return Err(Error::Domain("wavelength must lie in (1/2, 1)"));
    }
    if n < 4 || n % 2 != 0 {
        return Err(Error::Domain("grid must have an even number of intervals"));
    }
    let a = core_halfwidth(lambda);
    let th = PI / (2.0 * a);
    let x_half: Vec<f64> = (0..=n).map(|j| a * j as f64 / n as f64).collect();
    let norm = spec.norm_1m();
    if norm == 0.0 {
        return Ok(CorrectionProfile {
            lambda,
            a,
            fbar_half: alloc::vec![0.0; n + 1],
            ibar_half: alloc::vec![0.0; n + 1],
            x_half,
            a_coeff: 0.0,
            alpha_bar: 0.0,
        });
    }
    let gl = GaussLegendre::new(16);
    // for x, s in [−a, a] only the n = 0 image of the wrapped kernel is in support
    let ibar = |x: f64| gl.integrate_panels(|s| spec.perturbation(x - s) / norm * cos(th * s), -a, a, 16);
    let alpha_bar = -PI / (2.0 * a * a) * gl.integrate_panels(|y| ibar(y) * cos(th * y) * cos(th * y), 0.0, a, 32);
    let hfun = |y: f64| (PI / (4.0 * a) * alpha_bar + PI * PI / (16.0 * a * a) * ibar(y)) * cos(th * y);
    let gl8 = GaussLegendre::new(8);
    let mut cc = alloc::vec![0.0; n + 1];
    let mut cs = alloc::vec![0.0; n + 1];
    for j in 0..n {
        let (lo, hi) = (x_half[j], x_half[j + 1]);
        let mut ic = 0.0;
        let mut is = 0.0;
        for (y, w) in gl8.mapped(lo, hi) {
            let hv = hfun(y);
            ic += w * hv * cos(th * y);
            is += w * hv * sin(th * y);
        }
        cc[j + 1] = cc[j] + ic;
        cs[j + 1] = cs[j] + is;
    }
    let psi: Vec<f64> = x_half
        .iter()
        .enumerate()
        .map(|(j, x)| 2.0 * a / PI * (sin(th * x) * cc[j] - cos(th * x) * cs[j]))
        .collect();
    let h = a / n as f64;
    let a_coeff = -PI / (2.0 * a) * simpson(&psi, h);
    let fbar_half: Vec<f64> = x_half.iter().zip(&psi).map(|(x, p)| a_coeff * cos(th * x) + p).collect();
    let ibar_half = x_half.iter().map(|x| ibar(*x)).collect();
    Ok(CorrectionProfile { lambda, a, x_half, fbar_half, a_coeff, alpha_bar, ibar_half })
}
