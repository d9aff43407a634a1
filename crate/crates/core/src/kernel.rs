//! Perturbed top-hat kernels.
//!
//! The total kernel is `φ = φ_T + φ̄` with `φ_T = H(1/4 - x²)` and an even,
//! zero-mean perturbation `φ̄` supported on `[-1/2, 1/2]`. Two closed-form
//! families are built in, `±ε̄ cos 2πx`, plus a piecewise-linear tabulated
//! family.

use alloc::vec::Vec;
use libm::{cos, fabs, sin};

use crate::quad::GaussLegendre;
use crate::{Error, Result, PI};

/// Shape of the perturbation `φ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    /// Unperturbed top hat.
    None,
    /// `φ̄ = +ε̄ cos 2πx` on `|x| ≤ 1/2`.
    CosPlus,
    /// `φ̄ = -ε̄ cos 2πx` on `|x| ≤ 1/2`.
    CosMinus,
    /// `φ̄ = ε̄ t(|x|)` with `t` piecewise linear on a uniform grid of `[0, 1/2]`.
    TabulatedEven,
}

/// Validated kernel description.
///
/// Immutable once built. `φ̄` is even by construction since only `[0, 1/2]`
/// is ever stored.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: PerturbationKind,
    eps_bar: f64,
    table: Option<Vec<f64>>,
    decay_bounds: Option<(f64, f64)>,
    admissible: bool,
}

/// Half-width of every supported kernel.
pub const SUPPORT_HALFWIDTH: f64 = 0.5;

/// Builds a kernel from a closed-form family, rejecting negative kernels.
pub fn make_kernel(kind: PerturbationKind, eps_bar: f64) -> Result<KernelSpec> {
    KernelSpec::new(kind, eps_bar)
}

impl KernelSpec {
    /// Closed-form kernel. `|ε̄| ≤ 1` is required for the cosine families.
    pub fn new(kind: PerturbationKind, eps_bar: f64) -> Result<Self> {
        if !eps_bar.is_finite() {
            return Err(Error::Domain("amplitude must be finite"));
        }
        match kind {
            PerturbationKind::TabulatedEven => {
                return Err(Error::Domain("tabulated kernels are built with from_table"))
            }
            PerturbationKind::CosPlus | PerturbationKind::CosMinus if fabs(eps_bar) > 1.0 => {
                return Err(Error::Admissibility { eps_bar })
            }
            _ => {}
        }
        let eps_bar = if kind == PerturbationKind::None { 0.0 } else { eps_bar };
        Ok(Self { kind, eps_bar, table: None, decay_bounds: None, admissible: true })
    }

    /// Pure top hat.
    pub fn top_hat() -> Self {
        Self {
            kind: PerturbationKind::None,
            eps_bar: 0.0,
            table: None,
            decay_bounds: None,
            admissible: true,
        }
    }

    /// The perturbation `φ̄ / ‖φ̄‖₁ᵐ` of unit size.
    ///
    /// For the cosine families this is `±(π/2) cos 2πx`, whose amplitude
    /// exceeds one, so the result is a perturbation shape and not an
    /// admissible kernel; [`KernelSpec::is_admissible`] reports `false`.
    pub fn normalized(kind: PerturbationKind) -> Result<Self> {
        match kind {
            PerturbationKind::CosPlus | PerturbationKind::CosMinus => Ok(Self {
                kind,
                eps_bar: 0.5 * PI,
                table: None,
                decay_bounds: None,
                admissible: false,
            }),
            _ => Err(Error::Domain("normalized shape needs a cosine family")),
        }
    }

    /// Tabulated perturbation `φ̄(x) = ε̄ t(|x|)`.
    ///
    /// `table` holds `t` at `m + 1` uniform nodes `x_j = j / (2m)`. It must
    /// vanish in mean and keep `1 + ε̄ t ≥ 0`.
    pub fn from_table(eps_bar: f64, table: Vec<f64>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::Table("need at least two nodes"));
        }
        if table.iter().any(|v| !v.is_finite()) || !eps_bar.is_finite() {
            return Err(Error::Table("non-finite entry"));
        }
        let m = table.len() - 1;
        let h = SUPPORT_HALFWIDTH / m as f64;
        let mean = crate::quad::trapezoid(&table, h);
        let scale = table.iter().map(|v| fabs(*v)).fold(0.0, f64::max).max(1e-300);
        if fabs(mean) > 1e-10 * scale {
            return Err(Error::Table("perturbation does not have zero mean"));
        }
        if table.iter().any(|v| 1.0 + eps_bar * v < 0.0) {
            return Err(Error::Admissibility { eps_bar });
        }
        Ok(Self {
            kind: PerturbationKind::TabulatedEven,
            eps_bar,
            table: Some(table),
            decay_bounds: None,
            admissible: true,
        })
    }

    /// Requests a support half-width; only `1/2` is supported.
    pub fn with_support_halfwidth(self, halfwidth: f64) -> Result<Self> {
        if halfwidth != SUPPORT_HALFWIDTH {
            return Err(Error::Domain("support half-width must be 1/2"));
        }
        Ok(self)
    }

    /// Records far-field decay constants `(M, γ)`. Compact kernels ignore them.
    pub fn with_decay_bounds(mut self, m: f64, gamma: f64) -> Result<Self> {
        if !(m > 0.0 && gamma > 0.0) {
            return Err(Error::Domain("decay bounds must be positive"));
        }
        self.decay_bounds = Some((m, gamma));
        Ok(self)
    }

    /// Perturbation family.
    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    /// Amplitude `ε̄`.
    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    /// Support half-width, always `1/2`.
    pub fn support_halfwidth(&self) -> f64 {
        SUPPORT_HALFWIDTH
    }

    /// Tabulated samples, if any.
    pub fn table(&self) -> Option<&[f64]> {
        self.table.as_deref()
    }

    /// Recorded decay constants.
    pub fn decay_bounds(&self) -> Option<(f64, f64)> {
        self.decay_bounds
    }

    /// Whether `φ_T + φ̄ ≥ 0` was checked at construction.
    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    fn signed_amp(&self) -> f64 {
        match self.kind {
            PerturbationKind::CosPlus => self.eps_bar,
            PerturbationKind::CosMinus => -self.eps_bar,
            _ => 0.0,
        }
    }

    /// `φ̄(x)`.
    pub fn perturbation(&self, x: f64) -> f64 {
        let ax = fabs(x);
        if ax > SUPPORT_HALFWIDTH {
            return 0.0;
        }
        match self.kind {
            PerturbationKind::None => 0.0,
            PerturbationKind::CosPlus | PerturbationKind::CosMinus => {
                self.signed_amp() * cos(2.0 * PI * x)
            }
            PerturbationKind::TabulatedEven => {
                let t = self.table.as_deref().unwrap_or(&[]);
                let m = t.len() - 1;
                let pos = ax / SUPPORT_HALFWIDTH * m as f64;
                let j = (pos as usize).min(m - 1);
                let w = pos - j as f64;
                self.eps_bar * ((1.0 - w) * t[j] + w * t[j + 1])
            }
        }
    }

    /// Total kernel `φ(x) = φ_T(x) + φ̄(x)`; the top hat takes value 1 at `|x| = 1/2`.
    pub fn value(&self, x: f64) -> f64 {
        if fabs(x) > SUPPORT_HALFWIDTH {
            0.0
        } else {
            1.0 + self.perturbation(x)
        }
    }

    /// `φ̂_T(k) = (2/k) sin(k/2)`.
    pub fn hat_top(k: f64) -> f64 {
        sinc(0.5 * k)
    }

    /// `dφ̂_T/dk`.
    pub fn hat_top_dk(k: f64) -> f64 {
        0.5 * sinc_d(0.5 * k)
    }

    /// `φ̂̄(k) = 2∫₀^∞ φ̄(s) cos(ks) ds`.
    pub fn hat_bar(&self, k: f64) -> f64 {
        let k = fabs(k);
        match self.kind {
            PerturbationKind::None => 0.0,
            PerturbationKind::CosPlus | PerturbationKind::CosMinus => {
                // -ε sin(k/2) 2k / (k² - 4π²) rewritten without the removable pole
                let d = k - 2.0 * PI;
                self.signed_amp() * half_sinc_over(d) * 2.0 * k / (k + 2.0 * PI)
            }
            PerturbationKind::TabulatedEven => self.table_transform(k).0,
        }
    }

    /// `dφ̂̄/dk` for `k ≥ 0`.
    pub fn hat_bar_dk(&self, k: f64) -> f64 {
        let sgn = if k < 0.0 { -1.0 } else { 1.0 };
        let k = fabs(k);
        let v = match self.kind {
            PerturbationKind::None => 0.0,
            PerturbationKind::CosPlus | PerturbationKind::CosMinus => {
                let d = k - 2.0 * PI;
                let g = half_sinc_over(d);
                let gd = half_sinc_over_d(d);
                let hk = 2.0 * k / (k + 2.0 * PI);
                let hd = 4.0 * PI / ((k + 2.0 * PI) * (k + 2.0 * PI));
                self.signed_amp() * (gd * hk + g * hd)
            }
            PerturbationKind::TabulatedEven => self.table_transform(k).1,
        };
        sgn * v
    }

    /// Transform of the whole kernel, `φ̂_T(k) + φ̂̄(k)`.
    pub fn hat_total(&self, k: f64) -> f64 {
        Self::hat_top(k) + self.hat_bar(k)
    }

    /// `‖φ̄‖₁ᵐ = max(∫|φ̄|, ∫|x φ̄|)`.
    pub fn norm_1m(&self) -> f64 {
        let (n0, n1) = self.l1_moments();
        n0.max(n1)
    }

    /// `(∫|φ̄|, ∫|x φ̄|)` over the real line.
    pub fn l1_moments(&self) -> (f64, f64) {
        match self.kind {
            PerturbationKind::None => (0.0, 0.0),
            PerturbationKind::CosPlus | PerturbationKind::CosMinus => {
                let e = fabs(self.eps_bar);
                (e * 2.0 / PI, e / (2.0 * PI))
            }
            PerturbationKind::TabulatedEven => self.table_moments(),
        }
    }

    /// Wrapped-kernel cosine coefficients `χ_0 … χ_{n_max}` of `φ̄/‖φ̄‖₁ᵐ`.
    ///
    /// With support inside `[-1/2, 1/2]` the coefficients do not depend on the
    /// wavelength; `λ` is only range-checked.
    pub fn wrapped_chi(&self, lambda: f64, n_max: usize) -> Result<Vec<f64>> {
        if !(lambda > 0.5 && lambda < 1.0) {
            return Err(Error::Domain("wavelength must lie in (1/2, 1)"));
        }
        Ok(self.chi(n_max))
    }

    /// Same as [`KernelSpec::wrapped_chi`] without the wavelength check.
    pub fn chi(&self, n_max: usize) -> Vec<f64> {
        let norm = self.norm_1m();
        (0..=n_max)
            .map(|n| {
                if norm == 0.0 || n == 0 {
                    0.0
                } else {
                    2.0 * self.hat_bar(2.0 * PI * n as f64) / norm
                }
            })
            .collect()
    }

    fn table_segments(&self) -> (&[f64], f64) {
        let t = self.table.as_deref().unwrap_or(&[0.0, 0.0]);
        (t, SUPPORT_HALFWIDTH / (t.len() - 1) as f64)
    }

    fn table_transform(&self, k: f64) -> (f64, f64) {
        let (t, h) = self.table_segments();
        let gl = GaussLegendre::new(6);
        let mut v = 0.0;
        let mut dv = 0.0;
        for j in 0..t.len() - 1 {
            let s0 = j as f64 * h;
            let s1 = s0 + h;
            let q = (t[j + 1] - t[j]) / h;
            let p = t[j] - q * s0;
            if k * h <= 1.0 {
                for (s, w) in gl.mapped(s0, s1) {
                    let f = p + q * s;
                    v += w * f * cos(k * s);
                    dv -= w * s * f * sin(k * s);
                }
            } else {
                let prim = |s: f64| (p + q * s) * sin(k * s) / k + q * cos(k * s) / (k * k);
                v += prim(s1) - prim(s0);
                // ∫ P sin = -P cos/k + P' sin/k² + P'' cos/k³ with P = ps + qs²
                let prim_d = |s: f64| {
                    let pp = p * s + q * s * s;
                    let p1 = p + 2.0 * q * s;
                    let p2 = 2.0 * q;
                    -pp * cos(k * s) / k + p1 * sin(k * s) / (k * k) + p2 * cos(k * s) / (k * k * k)
                };
                dv -= prim_d(s1) - prim_d(s0);
            }
        }
        (2.0 * self.eps_bar * v, 2.0 * self.eps_bar * dv)
    }

    fn table_moments(&self) -> (f64, f64) {
        let (t, h) = self.table_segments();
        let mut n0 = 0.0;
        let mut n1 = 0.0;
        let mut piece = |a: f64, b: f64, fa: f64, fb: f64| {
            n0 += 0.5 * (b - a) * fabs(fa + fb);
            let m = 0.5 * (a + b);
            let fm = 0.5 * (fa + fb);
            n1 += (b - a) / 6.0 * fabs(a * fa + 4.0 * m * fm + b * fb);
        };
        for j in 0..t.len() - 1 {
            let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
            let (fa, fb) = (t[j], t[j + 1]);
            if fa * fb < 0.0 {
                let r = a + h * fa / (fa - fb);
                piece(a, r, fa, 0.0);
                piece(r, b, 0.0, fb);
            } else {
                piece(a, b, fa, fb);
            }
        }
        let e = fabs(self.eps_bar);
        (2.0 * e * n0, 2.0 * e * n1)
    }
}

/// `sin x / x` with its removable value at 0.
pub(crate) fn sinc(x: f64) -> f64 {
    if fabs(x) < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        sin(x) / x
    }
}

/// Derivative of `sin x / x`.
pub(crate) fn sinc_d(x: f64) -> f64 {
    if fabs(x) < 1e-4 {
        let x2 = x * x;
        -x / 3.0 + x * x2 / 30.0
    } else {
        (x * cos(x) - sin(x)) / (x * x)
    }
}

/// `sin(d/2)/d`.
fn half_sinc_over(d: f64) -> f64 {
    0.5 * sinc(0.5 * d)
}

/// `d/dd [sin(d/2)/d]`.
fn half_sinc_over_d(d: f64) -> f64 {
    0.25 * sinc_d(0.5 * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn quad_hat_bar(spec: &KernelSpec, k: f64) -> f64 {
        2.0 * integrate(|s| spec.perturbation(s) * cos(k * s), 0.0, 0.5, 1e-14)
    }

    #[test]
    fn cos_transform_matches_quadrature() {
        let spec = KernelSpec::new(PerturbationKind::CosPlus, 0.3).unwrap();
        for &k in &[0.0, 0.5, 3.0, 2.0 * PI, 2.0 * PI + 1e-6, 7.0, 40.0] {
            let a = spec.hat_bar(k);
            let b = quad_hat_bar(&spec, k);
            assert!(fabs(a - b) < 1e-12, "k = {k}: {a} vs {b}");
        }
        assert!(fabs(spec.hat_bar(2.0 * PI) - 0.15) < 1e-15);
    }

    #[test]
    fn table_transform_matches_cos_family() {
        let m = 2000;
        let t: Vec<f64> = (0..=m).map(|j| cos(2.0 * PI * 0.5 * j as f64 / m as f64)).collect();
        let tab = KernelSpec::from_table(0.2, t).unwrap();
        let cp = KernelSpec::new(PerturbationKind::CosPlus, 0.2).unwrap();
        for &k in &[0.0, 1.0, 2.0 * PI, 20.0, 300.0] {
            assert!(fabs(tab.hat_bar(k) - cp.hat_bar(k)) < 1e-6);
            assert!(fabs(tab.hat_bar_dk(k) - cp.hat_bar_dk(k)) < 1e-6);
        }
        let (a, b) = tab.l1_moments();
        let (c, d) = cp.l1_moments();
        assert!(fabs(a - c) < 1e-6 && fabs(b - d) < 1e-6);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let spec = KernelSpec::new(PerturbationKind::CosMinus, 0.7).unwrap();
        for &k in &[0.3, 2.0 * PI, 9.0, 25.0] {
            let h = 1e-5;
            let fd = (spec.hat_bar(k + h) - spec.hat_bar(k - h)) / (2.0 * h);
            assert!(fabs(fd - spec.hat_bar_dk(k)) < 1e-9);
            let fd_t = (KernelSpec::hat_top(k + h) - KernelSpec::hat_top(k - h)) / (2.0 * h);
            assert!(fabs(fd_t - KernelSpec::hat_top_dk(k)) < 1e-9);
        }
    }

    #[test]
    fn non_zero_mean_table_is_rejected() {
        assert_eq!(
            KernelSpec::from_table(0.1, alloc::vec![1.0, 1.0]),
            Err(Error::Table("perturbation does not have zero mean"))
        );
    }
}
