//! Linear stability of steady states from the spectrum of the `W`-Jacobian.
//!
//! At a steady state `W_t = F(W)` is conjugate to the `u` linearisation through
//! `v = u w`, so both have the same eigenvalues; the `W` form stays well scaled
//! where `u` is exponentially small.

use faer::complex_native::c64;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpp::{asymmetry, FppProblem};
use crate::steady::{BranchPoint, Stability};

/// Growth rates below this are stable.
pub const STABLE_BELOW: f64 = -1e-8;

/// Asymmetry below which a state is treated as even about node 0.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Summary of the linearised spectrum at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Rightmost real part after removing the translation mode.
    pub max_growth_rate: f64,
    /// Rightmost real part within the even subspace (whole spectrum if not even).
    pub even_max: f64,
    /// Rightmost real part within the odd subspace, translation mode removed.
    pub odd_max: f64,
    /// Eigenvalue identified as the translation mode (`0` for the uniform state).
    pub translation: f64,
    pub stability: Stability,
    pub symmetric: bool,
}

fn eig(m: &Mat<f64>) -> Result<Vec<c64>> {
    let ev: Vec<c64> = m.eigenvalues::<c64>();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigFailure("non-finite eigenvalue".into()));
    }
    Ok(ev)
}

/// Blocks of a reflection-invariant matrix on the even and odd subspaces about node 0.
fn split(j: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let n = j.nrows();
    let h = n / 2;
    let paired = |i: usize| i != 0 && i != h;
    let even = Mat::from_fn(h + 1, h + 1, |r, c| {
        let row = if paired(r) { std::f64::consts::SQRT_2 } else { 1.0 };
        if paired(c) {
            row * std::f64::consts::FRAC_1_SQRT_2 * (j[(r, c)] + j[(r, n - c)])
        } else {
            row * j[(r, c)]
        }
    });
    let odd = Mat::from_fn(h - 1, h - 1, |r, c| j[(r + 1, c + 1)] - j[(r + 1, n - c - 1)]);
    (even, odd)
}

/// Spectrum of the linearisation at `w`.
pub fn spectrum(p: &FppProblem, w: &[f64], d: f64) -> Result<Spectrum> {
    spectrum_parts(p, w, d, true)
}

/// Odd-subspace part only, for states even about node 0; the even fields and
/// the stability class are left undetermined.
pub fn odd_spectrum(p: &FppProblem, w: &[f64], d: f64) -> Result<Spectrum> {
    spectrum_parts(p, w, d, false)
}

fn spectrum_parts(p: &FppProblem, w: &[f64], d: f64, with_even: bool) -> Result<Spectrum> {
    let j = p.jacobian(w, d)?;
    let nontrivial = w.iter().any(|v| v.abs() > 1e-12);
    // the translation mode is the eigenvalue closest to zero
    let remove_nearest = |ev: &mut Vec<c64>| -> f64 {
        let k = ev
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.re.hypot(a.1.im).total_cmp(&b.1.re.hypot(b.1.im)))
            .map(|(k, _)| k)
            .expect("non-empty spectrum");
        ev.swap_remove(k).re
    };
    let max_re = |ev: &[c64]| ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let symmetric = asymmetry(w) < SYMMETRY_TOL * w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if !symmetric && !with_even {
        return Err(Error::InvalidState("odd spectrum requested for a state that is not even".into()));
    }
    let (even_max, odd_max, translation) = if symmetric {
        let (e, o) = split(&j);
        let even_max = if with_even { max_re(&eig(&e)?) } else { f64::NAN };
        let mut ev_o = eig(&o)?;
        let t = if nontrivial { remove_nearest(&mut ev_o) } else { 0.0 };
        (even_max, max_re(&ev_o), t)
    } else {
        let mut ev = eig(&j)?;
        let t = if nontrivial { remove_nearest(&mut ev) } else { 0.0 };
        (max_re(&ev), f64::NAN, t)
    };
    if !with_even {
        let stability = Stability::Unknown;
        return Ok(Spectrum { max_growth_rate: f64::NAN, even_max, odd_max, translation, stability, symmetric });
    }
    let max_growth_rate = if odd_max.is_nan() { even_max } else { even_max.max(odd_max) };
    let stability = if max_growth_rate < STABLE_BELOW { Stability::Stable } else { Stability::Unstable };
    Ok(Spectrum { max_growth_rate, even_max, odd_max, translation, stability, symmetric })
}

/// Fills the stability fields of `point` and returns the spectrum summary.
pub fn stability_spectrum(p: &FppProblem, point: &mut BranchPoint) -> Result<Spectrum> {
    let s = spectrum(p, &point.w, point.d)?;
    point.max_growth_rate = s.max_growth_rate;
    point.stability = s.stability;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlkpp_core::dispersion::{dispersion_omega, neutral_d};
    use nlkpp_core::kernel::{make_kernel, PerturbationKind};

    fn sorted(mut v: Vec<c64>) -> Vec<c64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn split_blocks_reproduce_full_spectrum() {
        let spec = make_kernel(PerturbationKind::CosPlus, 0.3).unwrap();
        let p = FppProblem::new(&spec, 0.9, 256).unwrap();
        let w: Vec<f64> = p
            .x()
            .iter()
            .map(|x| {
                let t = 2.0 * std::f64::consts::PI * x / 0.9;
                0.4 * t.cos() - 0.2 * (2.0 * t).cos() + 0.05 * (3.0 * t).cos()
            })
            .collect();
        let j = p.jacobian(&w, 2e-3).unwrap();
        let full = sorted(eig(&j).unwrap());
        let (e, o) = split(&j);
        let mut parts = eig(&e).unwrap();
        parts.extend(eig(&o).unwrap());
        let parts = sorted(parts);
        assert_eq!(full.len(), parts.len());
        let scale = full.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
        for (a, b) in full.iter().zip(&parts) {
            assert!((a.re - b.re).abs() < 1e-9 * scale && (a.im - b.im).abs() < 1e-9 * scale, "{a:?} {b:?}");
        }
    }

    #[test]
    fn uniform_state_growth_matches_dispersion() {
        let spec = make_kernel(PerturbationKind::CosPlus, 0.01).unwrap();
        let lambda = 0.95;
        let p = FppProblem::new(&spec, lambda, 512).unwrap();
        let w = vec![0.0; 512];
        let dp = neutral_d(&spec, lambda);
        let inside = spectrum(&p, &w, 0.8 * dp).unwrap();
        let expected = -dispersion_omega(&spec, 2.0 * std::f64::consts::PI / lambda, 0.8 * dp);
        assert!(expected > 0.0);
        assert!((inside.max_growth_rate - expected).abs() < 1e-6 * expected.max(1e-3), "{inside:?} {expected}");
        assert_eq!(inside.stability, Stability::Unstable);
        let outside = spectrum(&p, &w, 1.5 * dp).unwrap();
        assert_eq!(outside.stability, Stability::Stable);
    }
}
