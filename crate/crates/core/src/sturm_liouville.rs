//! Principal eigenpair of `F'' + (α − Σ Iₙ cos 2nπx) F = 0` on `(−a, a)`
//! with `F(±a) = 0`, `F > 0`, `∫F = 1`.
//!
//! The even eigenfunction is computed on `[0, a]` with a symmetry condition
//! at the origin. Second-order central differences give a tridiagonal matrix
//! which, after a diagonal similarity fixing the ghost-point row, is
//! symmetric. The smallest eigenvalue is isolated by Sturm-sequence bisection
//! and its eigenvector obtained by inverse iteration with a shift just below
//! it, where the shifted matrix is an M-matrix and the iterates stay positive.

use alloc::vec::Vec;
use libm::{cbrt, cos, exp, fabs, sqrt};

use crate::airy::{ai, AiryConstants};
use crate::quad::simpson;
use crate::roots::bisect;
use crate::{Error, Result, PI};

/// Default number of intervals on `[0, a]`.
pub const DEFAULT_GRID: usize = 500;

/// Shape of the principal eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Maximum at the centre.
    SingleHump,
    /// Local minimum at the centre, maxima off-centre.
    DoubleHump,
}

/// A cosine-potential eigenvalue problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SlProblem {
    /// Half-width of the interval, in `(0, 1/4)`.
    pub a: f64,
    /// Potential coefficients `(I₁, …, I_N)`.
    pub i_vector: Vec<f64>,
    /// Number of intervals on `[0, a]`; must be even.
    pub grid_n: usize,
}

impl SlProblem {
    /// Problem with the default grid.
    pub fn new(a: f64, i_vector: Vec<f64>) -> Self {
        Self { a, i_vector, grid_n: DEFAULT_GRID }
    }

    /// Single-mode potential `I cos 2πx`.
    pub fn scalar(a: f64, i1: f64) -> Self {
        Self::new(a, alloc::vec![i1])
    }

    /// Overrides the grid size.
    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid_n = n;
        self
    }
}

/// `Q(x, I) = Σ Iₙ cos 2nπx`.
pub fn potential(i_vector: &[f64], x: f64) -> f64 {
    i_vector
        .iter()
        .enumerate()
        .map(|(n, c)| c * cos(2.0 * PI * (n + 1) as f64 * x))
        .sum()
}

/// Principal eigenpair of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SlSolution {
    /// Half-width.
    pub a: f64,
    /// Principal eigenvalue `α_L`.
    pub alpha_l: f64,
    /// Nodes `x_j = j a / n` on `[0, a]`.
    pub x_half: Vec<f64>,
    /// Eigenfunction at `x_half`, positive with unit mass over `[−a, a]`.
    pub f_half: Vec<f64>,
    /// Projections `G_r = ∫ F cos 2rπy dy`, `r = 1..N`.
    pub g: Vec<f64>,
    /// Centre classification.
    pub structure: Structure,
}

impl SlSolution {
    /// Nodes on `[−a, a]`.
    pub fn x_full(&self) -> Vec<f64> {
        let n = self.x_half.len() - 1;
        (0..=2 * n)
            .map(|j| if j < n { -self.x_half[n - j] } else { self.x_half[j - n] })
            .collect()
    }

    /// Eigenfunction on `[−a, a]` (even extension).
    pub fn f_full(&self) -> Vec<f64> {
        let n = self.f_half.len() - 1;
        (0..=2 * n)
            .map(|j| if j < n { self.f_half[n - j] } else { self.f_half[j - n] })
            .collect()
    }

    /// Linear interpolation of `F` at `x`; zero outside `[−a, a]`.
    pub fn eval(&self, x: f64) -> f64 {
        interp_half(&self.f_half, self.a, x)
    }

    /// `∫F` by Simpson's rule.
    pub fn mass(&self) -> f64 {
        let h = self.a / (self.f_half.len() - 1) as f64;
        2.0 * simpson(&self.f_half, h)
    }
}

pub(crate) fn interp_half(f: &[f64], a: f64, x: f64) -> f64 {
    let ax = fabs(x);
    if ax >= a {
        return 0.0;
    }
    let n = f.len() - 1;
    let pos = ax / a * n as f64;
    let j = (pos as usize).min(n - 1);
    let w = pos - j as f64;
    (1.0 - w) * f[j] + w * f[j + 1]
}

/// Principal eigenpair of `−F'' + V F = α F` on `[0, len]`, `F'(0) = 0`, `F(len) = 0`.
///
/// Returns `α` and `F` at the `n + 1` nodes (last node zero) with `max F = 1`.
pub fn principal_half_interval<V: Fn(f64) -> f64>(v: V, len: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    if n < 4 {
        return Err(Error::Domain("grid too coarse"));
    }
    let h = len / n as f64;
    let ih2 = 1.0 / (h * h);
    let diag: Vec<f64> = (0..n).map(|j| 2.0 * ih2 + v(j as f64 * h)).collect();
    let mut off = alloc::vec![-ih2; n - 1];
    off[0] = -core::f64::consts::SQRT_2 * ih2;
    if diag.iter().any(|d| !d.is_finite()) {
        return Err(Error::Domain("potential is not finite"));
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { fabs(off[i - 1]) } else { 0.0 } + if i + 1 < n { fabs(off[i]) } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let width = hi - lo;
    let (mut a, mut b) = (lo - 1e-12 * width.max(1.0), hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b || b - a < 1e-15 * width {
            break;
        }
        if sturm_count(&diag, &off, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    // count(a) = 0, so the shift is strictly below the smallest eigenvalue
    let sigma = a - (1e-10 * width).max(1e-12);
    let mut y = alloc::vec![1.0; n];
    let mut converged = false;
    for _ in 0..500 {
        let mut z = thomas(&diag, &off, sigma, &y)?;
        let nz = z.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
        if !(nz > 0.0) || !nz.is_finite() {
            return Err(Error::Convergence("inverse iteration broke down"));
        }
        let sign = if z.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for v in &mut z {
            *v *= sign / nz;
        }
        let diff = z.iter().zip(&y).fold(0.0f64, |m, (p, q)| m.max(fabs(p - q)));
        y = z;
        if diff < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence("inverse iteration did not settle in 500 steps"));
    }
    // Rayleigh quotient on the symmetric form
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mut ty = diag[i] * y[i];
        if i > 0 {
            ty += off[i - 1] * y[i - 1];
        }
        if i + 1 < n {
            ty += off[i] * y[i + 1];
        }
        num += y[i] * ty;
        den += y[i] * y[i];
    }
    let alpha = num / den;
    let mut f = y;
    f[0] *= core::f64::consts::SQRT_2;
    f.push(0.0);
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(*v));
    let fmin = f.iter().fold(0.0f64, |m, v| m.min(*v));
    if fmin < -1e-12 * fmax {
        return Err(Error::Positivity);
    }
    for v in &mut f {
        *v = v.max(0.0) / fmax;
    }
    Ok((alpha, f))
}

fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let qq = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn thomas(diag: &[f64], off: &[f64], sigma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = alloc::vec![0.0; n];
    let mut d = alloc::vec![0.0; n];
    let mut beta = diag[0] - sigma;
    if beta == 0.0 {
        return Err(Error::Convergence("singular shifted matrix"));
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = off[i - 1] / beta;
        beta = diag[i] - sigma - off[i - 1] * c[i - 1];
        if beta == 0.0 {
            return Err(Error::Convergence("singular shifted matrix"));
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves `[SL(I, a)]` for `a ∈ (0, 1/4)`.
pub fn solve_sl(problem: &SlProblem) -> Result<SlSolution> {
    if !(problem.a > 0.0 && problem.a < 0.25) {
        return Err(Error::Domain("half-width must lie in (0, 1/4)"));
    }
    solve_cosine_potential(problem.a, &problem.i_vector, problem.grid_n)
}

/// Same as [`solve_sl`] but accepts any `a > 0`, including the limiting `a = 1/4`.
pub fn solve_cosine_potential(a: f64, i_vector: &[f64], n: usize) -> Result<SlSolution> {
    if i_vector.is_empty() {
        return Err(Error::Domain("need at least one potential coefficient"));
    }
    if n % 2 != 0 {
        return Err(Error::Domain("grid must have an even number of intervals"));
    }
    if !(a > 0.0) {
        return Err(Error::Domain("half-width must be positive"));
    }
    let (alpha_l, mut f) = principal_half_interval(|x| potential(i_vector, x), a, n)?;
    let h = a / n as f64;
    let mass = 2.0 * simpson(&f, h);
    for v in &mut f {
        *v /= mass;
    }
    let x_half: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
    let g = (1..=i_vector.len())
        .map(|r| {
            let w: Vec<f64> = x_half
                .iter()
                .zip(&f)
                .map(|(x, v)| v * cos(2.0 * PI * r as f64 * x))
                .collect();
            2.0 * simpson(&w, h)
        })
        .collect();
    let q0: f64 = i_vector.iter().sum();
    let structure = if alpha_l < q0 { Structure::DoubleHump } else { Structure::SingleHump };
    Ok(SlSolution { a, alpha_l, x_half, f_half: f, g, structure })
}

/// `G₁(I, a)` for each requested `I` with the default grid.
pub fn g1_profile(a: f64, i_values: &[f64]) -> Result<Vec<f64>> {
    i_values
        .iter()
        .map(|&i| solve_sl(&SlProblem::scalar(a, i)).map(|s| s.g[0]))
        .collect()
}

/// `G_r(0, a) = −(16a²r² − 1)⁻¹ cos(2arπ)`.
pub fn g_unperturbed(a: f64, r: usize) -> f64 {
    let r = r as f64;
    -cos(2.0 * a * r * PI) / (16.0 * a * a * r * r - 1.0)
}

/// Asymptotic regime of `[SL(I, a)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `I → +∞`, humps in Airy layers at `x = ±a`.
    AiryEdge,
    /// `I → −∞`, Gaussian spike at the centre.
    GaussCentre,
    /// `a → 0` with `Î = I a⁴` fixed.
    SmallA,
    /// `a → 1/4`.
    NearQuarter,
}

/// Leading-order edge profile for large positive `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryEdgeProfile {
    /// Half-width.
    pub a: f64,
    /// Slope `c = 2π sin 2πa` of the potential at the edge.
    pub c: f64,
    /// Eigenvalue correction `ᾱ = −c^{2/3} a_i`.
    pub alpha_bar: f64,
    /// Airy constants.
    pub consts: AiryConstants,
}

impl AiryEdgeProfile {
    /// `f_L(x̄) = c^{1/3}/(2J) Ai(c^{1/3} x̄ + a_i)` for `x̄ ≥ 0`.
    pub fn eval(&self, xbar: f64) -> f64 {
        if xbar < 0.0 {
            return 0.0;
        }
        let c3 = cbrt(self.c);
        c3 / (2.0 * self.consts.j) * ai(c3 * xbar + self.consts.a_i)
    }

    /// `α_L ≈ I cos 2πa + I^{2/3} ᾱ`.
    pub fn alpha_approx(&self, i: f64) -> f64 {
        i * cos(2.0 * PI * self.a) + cbrt(i * i) * self.alpha_bar
    }

    /// `F_L(x) ≈ I^{1/3} [f_L(I^{1/3}(x + a)) + f_L(I^{1/3}(a − x))]`.
    pub fn profile(&self, i: f64, x: f64) -> f64 {
        let s = cbrt(i);
        s * (self.eval(s * (x + self.a)) + self.eval(s * (self.a - x)))
    }
}

/// Leading-order centre profile for large negative `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussCentreProfile {
    /// `α̃ = −√2 π`, with `α_L ≈ I − α̃ |I|^{1/2}`.
    pub alpha_tilde: f64,
}

impl GaussCentreProfile {
    /// `f̃(x̃) = 2^{−1/4} exp(−π x̃²/√2)`.
    pub fn eval(&self, xt: f64) -> f64 {
        exp(-PI * xt * xt / core::f64::consts::SQRT_2) / sqrt(core::f64::consts::SQRT_2)
    }

    /// `α_L ≈ I − α̃ |I|^{1/2}`.
    pub fn alpha_approx(&self, i: f64) -> f64 {
        i - self.alpha_tilde * sqrt(fabs(i))
    }

    /// `F_L(x) ≈ |I|^{1/4} f̃(|I|^{1/4} x)`.
    pub fn profile(&self, i: f64, x: f64) -> f64 {
        let s = sqrt(sqrt(fabs(i)));
        s * self.eval(s * x)
    }
}

/// Solution of the rescaled small-`a` problem
/// `f_XX + (α̂ + 2π² Î X²) f = 0` on `(−1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallAProfile {
    /// `Î = I a⁴`.
    pub i_hat: f64,
    /// Principal eigenvalue `α̂`.
    pub alpha_hat: f64,
    /// `f̂` at `X_j = j/n` on `[0, 1]`, unit mass over `[−1, 1]`.
    pub f_half: Vec<f64>,
}

impl SmallAProfile {
    /// `f̂(X)` by linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        interp_half(&self.f_half, 1.0, x)
    }
}

/// Rescaled problem at `a → 1/4`, which coincides with `[SL(I, 1/4)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearQuarterProfile {
    /// Potential amplitude.
    pub i: f64,
    /// `ᾱ(I)`.
    pub alpha_bar: f64,
    /// `ḡ₁(I)`.
    pub g1_bar: f64,
    /// `c_i` of the corrected large-`I` law.
    pub c_i: f64,
}

impl NearQuarterProfile {
    /// `G₁ ≈ 2π(1 + c_i Ī^{−1/3}) ā` with `ā = 1/4 − a`, `Ī = ā³ I`.
    pub fn g1_corrected(&self, abar: f64) -> f64 {
        let ibar = abar * abar * abar * self.i;
        2.0 * PI * (1.0 + self.c_i / cbrt(ibar)) * abar
    }

    /// `α_L ≈ 2π Ī (1 + c_i Ī^{−1/3}) ā^{−2}`.
    pub fn alpha_corrected(&self, abar: f64) -> f64 {
        let ibar = abar * abar * abar * self.i;
        2.0 * PI * ibar * (1.0 + self.c_i / cbrt(ibar)) / (abar * abar)
    }
}

/// Result of [`asymptotic_profiles`].
#[derive(Debug, Clone, PartialEq)]
pub enum AsymptoticProfile {
    /// See [`AiryEdgeProfile`].
    AiryEdge(AiryEdgeProfile),
    /// See [`GaussCentreProfile`].
    GaussCentre(GaussCentreProfile),
    /// See [`SmallAProfile`].
    SmallA(SmallAProfile),
    /// See [`NearQuarterProfile`].
    NearQuarter(NearQuarterProfile),
}

/// Leading-order solution of `[SL(I, a)]` in one of its limits.
pub fn asymptotic_profiles(regime: Regime, a: f64, i: f64) -> Result<AsymptoticProfile> {
    match regime {
        Regime::AiryEdge => {
            if !(a > 0.0 && a < 0.25) || !(i > 0.0) {
                return Err(Error::Range("Airy edge needs I > 0 and a in (0, 1/4)"));
            }
            Ok(AsymptoticProfile::AiryEdge(airy_edge(a)))
        }
        Regime::GaussCentre => {
            if !(i < 0.0) {
                return Err(Error::Range("Gaussian centre needs I < 0"));
            }
            Ok(AsymptoticProfile::GaussCentre(GaussCentreProfile {
                alpha_tilde: -core::f64::consts::SQRT_2 * PI,
            }))
        }
        Regime::SmallA => {
            if !(a > 0.0 && a <= 0.1) {
                return Err(Error::Range("small-a regime needs a <= 0.1"));
            }
            Ok(AsymptoticProfile::SmallA(small_a(i * a * a * a * a, 2000)?))
        }
        Regime::NearQuarter => {
            if !(a >= 0.2 && a < 0.25) {
                return Err(Error::Range("near-quarter regime needs a in [0.2, 1/4)"));
            }
            Ok(AsymptoticProfile::NearQuarter(near_quarter(i)?))
        }
    }
}

/// Airy edge constants for half-width `a`.
pub fn airy_edge(a: f64) -> AiryEdgeProfile {
    let consts = AiryConstants::compute();
    let c = 2.0 * PI * libm::sin(2.0 * PI * a);
    let c3 = cbrt(c);
    AiryEdgeProfile { a, c, alpha_bar: -c3 * c3 * consts.a_i, consts }
}

/// Small-`a` eigenproblem on `n` intervals of `[0, 1]`.
pub fn small_a(i_hat: f64, n: usize) -> Result<SmallAProfile> {
    let (alpha_hat, mut f) =
        principal_half_interval(|x| -2.0 * PI * PI * i_hat * x * x, 1.0, n)?;
    let h = 1.0 / n as f64;
    let mass = 2.0 * simpson(&f, h);
    for v in &mut f {
        *v /= mass;
    }
    Ok(SmallAProfile { i_hat, alpha_hat, f_half: f })
}

/// `α̂(Î)` with one Richardson step on grids of `n` and `2n` intervals.
pub fn small_a_alpha(i_hat: f64, n: usize) -> Result<f64> {
    let a1 = small_a(i_hat, n)?.alpha_hat;
    let a2 = small_a(i_hat, 2 * n)?.alpha_hat;
    Ok((4.0 * a2 - a1) / 3.0)
}

/// `ᾱ(I) = α_L(I, 1/4)` and `ḡ₁(I) = G₁(I, 1/4)`.
pub fn near_quarter(i: f64) -> Result<NearQuarterProfile> {
    let s = solve_cosine_potential(0.25, &[i], DEFAULT_GRID)?;
    Ok(NearQuarterProfile {
        i,
        alpha_bar: s.alpha_l,
        g1_bar: s.g[0],
        c_i: AiryConstants::compute().c_i,
    })
}

/// Root `a₀` of `α̂(π a₀⁴ / 2) = 0`, where the small-`a` profile splits.
pub fn compute_a0() -> Result<f64> {
    let f = |ih: f64| small_a_alpha(ih, 1000).unwrap_or(f64::NAN);
    if !(f(0.0) > 0.0 && f(10.0) < 0.0) {
        return Err(Error::Bracket("alpha_hat has no sign change on [0, 10]"));
    }
    let i0 = bisect(f, 0.0, 10.0, 1e-12)?;
    Ok(sqrt(sqrt(2.0 * i0 / PI)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_brackets_diagonal_matrix() {
        let d = [1.0, 2.0, 3.0];
        let e = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &e, 0.5), 0);
        assert_eq!(sturm_count(&d, &e, 2.5), 2);
    }

    #[test]
    fn thomas_solves_tridiagonal_system() {
        let d = [4.0, 4.0, 4.0];
        let e = [1.0, 1.0];
        let x = thomas(&d, &e, 0.0, &[5.0, 6.0, 5.0]).unwrap();
        for v in x {
            assert!(fabs(v - 1.0) < 1e-14);
        }
    }

    #[test]
    fn odd_grid_is_rejected() {
        let p = SlProblem::scalar(0.1, 0.0).with_grid(501);
        assert!(matches!(solve_sl(&p), Err(Error::Domain(_))));
    }
}
