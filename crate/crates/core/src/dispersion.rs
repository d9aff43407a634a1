//! Linear stability of `u ≡ 1`: dispersion relation, neutral curves,
//! tongue geometry and the weakly nonlinear seed.

use alloc::vec::Vec;
use libm::{cos, fabs, sqrt};

use crate::kernel::KernelSpec;
use crate::roots::{bisect, golden_max};
use crate::{Error, Result, PI};

/// `ω(k, D) = D k² + φ̂_T(k) + φ̂̄(k)`; modes with `ω < 0` grow.
pub fn dispersion_omega(spec: &KernelSpec, k: f64, d: f64) -> f64 {
    d * k * k + spec.hat_total(k)
}

/// `∂ω/∂k`.
pub fn dispersion_omega_dk(spec: &KernelSpec, k: f64, d: f64) -> f64 {
    2.0 * d * k + KernelSpec::hat_top_dk(k) + spec.hat_bar_dk(k)
}

/// Neutral-curve diffusivity `D_p(λ)`, the zero of `ω(2π/λ, ·)`.
pub fn neutral_d(spec: &KernelSpec, lambda: f64) -> f64 {
    let k = 2.0 * PI / lambda;
    -spec.hat_total(k) / (k * k)
}

/// Neutral curve of the unperturbed top hat, `-(λ³/4π³) sin(π/λ)`.
pub fn neutral_d_top_hat(lambda: f64) -> f64 {
    -(lambda * lambda * lambda) / (4.0 * PI * PI * PI) * libm::sin(PI / lambda)
}

/// Sampled boundary of one instability tongue.
#[derive(Debug, Clone, PartialEq)]
pub struct NeutralCurve {
    /// Wavelength samples, endpoints included.
    pub lambda_grid: Vec<f64>,
    /// `D_p` at each sample; exactly zero at the endpoints.
    pub d_values: Vec<f64>,
    /// Tongue index (1-based).
    pub tongue_index: usize,
    /// Lower endpoint of the tongue.
    pub lambda_min: f64,
    /// Upper endpoint of the tongue.
    pub lambda_max: f64,
    /// Maximum of `D_p` over the tongue.
    pub delta1: f64,
    /// Wavelength at which the maximum is attained.
    pub lambda_at_delta1: f64,
}

/// Endpoints of tongue `n` and its peak `(λ_lo, λ_hi, λ_peak, D_peak)`.
pub fn tongue_extent(spec: &KernelSpec, tongue: usize) -> Result<(f64, f64, f64, f64)> {
    if tongue == 0 {
        return Err(Error::Domain("tongue index starts at 1"));
    }
    if tongue > 4 {
        return Err(Error::Domain("only tongues 1..=4 are resolved"));
    }
    let n = tongue as f64;
    let lo_nom = 1.0 / (2.0 * n);
    let hi_nom = 1.0 / (2.0 * n - 1.0);
    let f = |l: f64| neutral_d(spec, l);
    // coarse scan for the best starting point inside the nominal interval
    let samples = 400;
    let mut best = (0.5 * (lo_nom + hi_nom), f64::NEG_INFINITY);
    for i in 1..samples {
        let l = lo_nom + (hi_nom - lo_nom) * i as f64 / samples as f64;
        let v = f(l);
        if v > best.1 {
            best = (l, v);
        }
    }
    if best.1 <= 0.0 {
        return Err(Error::EmptyTongue { tongue });
    }
    let step = (hi_nom - lo_nom) / samples as f64;
    let (lp, dp) = golden_max(f, best.0 - step, best.0 + step, 1e-12);
    // outer walk limits keep neighbouring tongues out of reach
    let lo_limit = if tongue < 4 { 1.0 / (2.0 * n + 1.0) } else { 0.1 };
    let hi_limit = if tongue == 1 { 2.0 } else { 1.0 / (2.0 * n - 2.0) };
    let lo = walk_to_zero(&f, lp, lo_limit, -step)?;
    let hi = walk_to_zero(&f, lp, hi_limit, step)?;
    Ok((lo, hi, lp, dp))
}

fn walk_to_zero<F: Fn(f64) -> f64>(f: &F, start: f64, limit: f64, step: f64) -> Result<f64> {
    let mut a = start;
    loop {
        let mut b = a + step;
        if (step > 0.0 && b >= limit) || (step < 0.0 && b <= limit) {
            b = limit;
        }
        if f(b) <= 0.0 {
            return bisect(f, a.min(b), a.max(b), 1e-15);
        }
        if b == limit {
            return Err(Error::Bracket("tongue boundary not found before the limit"));
        }
        a = b;
    }
}

/// Samples tongue `tongue` of the neutral curve at `n_points ≥ 2` wavelengths.
pub fn neutral_curve(spec: &KernelSpec, tongue: usize, n_points: usize) -> Result<NeutralCurve> {
    if n_points < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let (lo, hi, lp, dp) = tongue_extent(spec, tongue)?;
    let mut lambda_grid = Vec::with_capacity(n_points);
    let mut d_values = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let l = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
        let d = if i == 0 || i + 1 == n_points { 0.0 } else { neutral_d(spec, l).max(0.0) };
        lambda_grid.push(l);
        d_values.push(d);
    }
    Ok(NeutralCurve {
        lambda_grid,
        d_values,
        tongue_index: tongue,
        lambda_min: lo,
        lambda_max: hi,
        delta1: dp,
        lambda_at_delta1: lp,
    })
}

/// Largest `‖(ω, ω′) − (ω_T, ω_T′)‖∞` over the sample grid.
///
/// Fails with [`Error::BoundViolation`] if it exceeds `√2 ‖φ̄‖₁ᵐ`.
pub fn dispersion_perturbation_bound(spec: &KernelSpec, k_samples: &[f64], d_samples: &[f64]) -> Result<f64> {
    if k_samples.is_empty() || d_samples.is_empty() {
        return Err(Error::Domain("sample sets must be nonempty"));
    }
    let top = KernelSpec::top_hat();
    let mut worst: f64 = 0.0;
    for &k in k_samples {
        for &d in d_samples {
            let dw = fabs(dispersion_omega(spec, k, d) - dispersion_omega(&top, k, d));
            let dwk = fabs(dispersion_omega_dk(spec, k, d) - dispersion_omega_dk(&top, k, d));
            worst = worst.max(dw.max(dwk));
        }
    }
    let bound = core::f64::consts::SQRT_2 * spec.norm_1m();
    if worst > bound * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::BoundViolation { value: worst, bound });
    }
    Ok(worst)
}

/// Coefficients of the weakly nonlinear periodic state near the neutral curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WnlSeed {
    /// Wavelength.
    pub lambda: f64,
    /// Perturbation amplitude of the kernel.
    pub eps_bar: f64,
    /// Requested diffusivity.
    pub d: f64,
    /// Neutral-curve value `D_0(λ)`.
    pub d0: f64,
    /// Amplitude prefactor `2/√(D_0 f)`; the first-harmonic amplitude is this times `√(D_0 − D)`.
    pub a0_coeff: f64,
    /// First-harmonic amplitude.
    pub amplitude: f64,
    /// Kernel transform at `2π/λ`.
    pub k1: f64,
    /// Kernel transform at `4π/λ`.
    pub k2: f64,
    /// Landau coefficient `f(k₁, k₂)`.
    pub f_value: f64,
    /// `+1` for a supercritical bifurcation (`f > 0`).
    pub d2_sign: f64,
    /// Set when `(D_0 − D)/D_0 > 0.2`, outside the expansion's reach.
    pub far_from_onset: bool,
}

impl WnlSeed {
    /// `u(x) = 1 + A cos(2πx/λ)` on `n` uniform points of `[0, λ)`.
    pub fn profile(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = self.lambda * i as f64 / n as f64;
                1.0 + self.amplitude * cos(2.0 * PI * x / self.lambda)
            })
            .collect()
    }
}

/// `f(k₁, k₂) = (k₁ + k₂)/(k₂ − 4k₁) + 2k₁ + 2`.
pub fn landau_f(k1: f64, k2: f64) -> f64 {
    (k1 + k2) / (k2 - 4.0 * k1) + 2.0 * k1 + 2.0
}

/// Weakly nonlinear state at `(λ, D)` with `0 < D ≤ D_0(λ)`.
pub fn wnl_seed(spec: &KernelSpec, lambda: f64, d: f64) -> Result<WnlSeed> {
    if !(lambda > 0.0) || !(d > 0.0) {
        return Err(Error::Domain("wavelength and diffusivity must be positive"));
    }
    let d0 = neutral_d(spec, lambda);
    if d > d0 {
        return Err(Error::Supercritical { d, d0 });
    }
    let k1 = spec.hat_total(2.0 * PI / lambda);
    let k2 = spec.hat_total(4.0 * PI / lambda);
    let f_value = landau_f(k1, k2);
    if !(f_value > 0.0) {
        return Err(Error::Domain("subcritical onset: f(k1, k2) is not positive"));
    }
    let a0_coeff = 2.0 / sqrt(d0 * f_value);
    Ok(WnlSeed {
        lambda,
        eps_bar: spec.eps_bar(),
        d,
        d0,
        a0_coeff,
        amplitude: a0_coeff * sqrt((d0 - d).max(0.0)),
        k1,
        k2,
        f_value,
        d2_sign: 1.0,
        far_from_onset: (d0 - d) / d0 > 0.2,
    })
}

/// Wavelength `λ₀` at which the one-peak onset `D_0(λ)` and the onset of the
/// λ/3-periodic state `D_0(λ/3)` coincide.
///
/// Both onsets are taken from the closed-form neutral relation, continued
/// below `D = 0` where needed; the root returned is the crossing closest to
/// `λ = 1`, which is `λ = 1` itself for the top hat.
pub fn lambda0(spec: &KernelSpec) -> Result<f64> {
    if spec.eps_bar() == 0.0 {
        return Ok(1.0);
    }
    let g = |l: f64| neutral_d(spec, l) - neutral_d(spec, l / 3.0);
    let below = scan_crossing(&g, 1.0 - 1e-9, 0.6, -1e-3);
    let above = scan_crossing(&g, 1.0 + 1e-9, 1.5, 1e-3);
    match (below, above) {
        (Some(b), Some(a)) => Ok(if 1.0 - b <= a - 1.0 { b } else { a }),
        (Some(r), None) | (None, Some(r)) => Ok(r),
        (None, None) => Err(Error::Bracket("no crossing of the onset curves in (0.6, 1.5)")),
    }
}

fn scan_crossing<F: Fn(f64) -> f64>(g: &F, start: f64, end: f64, step: f64) -> Option<f64> {
    let mut x0 = start;
    let mut g0 = g(x0);
    while (step < 0.0 && x0 > end) || (step > 0.0 && x0 < end) {
        let x1 = x0 + step;
        let g1 = g(x1);
        if g1 == 0.0 {
            return Some(x1);
        }
        if g1.signum() != g0.signum() {
            return bisect(g, x0.min(x1), x0.max(x1), 1e-15).ok();
        }
        x0 = x1;
        g0 = g1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PerturbationKind;

    #[test]
    fn zero_mode_limit_is_one() {
        let spec = KernelSpec::top_hat();
        assert!(fabs(dispersion_omega(&spec, 1e-9, 0.3) - 1.0) < 1e-12);
    }

    #[test]
    fn first_tongue_endpoints_for_top_hat() {
        let c = neutral_curve(&KernelSpec::top_hat(), 1, 11).unwrap();
        assert!(fabs(c.lambda_min - 0.5) < 1e-12);
        assert!(fabs(c.lambda_max - 1.0) < 1e-12);
    }

    #[test]
    fn large_amplitude_empties_first_tongue() {
        let spec = KernelSpec::new(PerturbationKind::CosPlus, 0.8).unwrap();
        assert_eq!(neutral_curve(&spec, 1, 10), Err(Error::EmptyTongue { tongue: 1 }));
    }
}
