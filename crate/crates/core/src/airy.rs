//! Airy function `Ai` and the constants of the edge-layer problem.

use libm::{cbrt, cos, exp, fabs, sin, sqrt};

use crate::quad::integrate;
use crate::roots::brent;
use crate::PI;

const AI0: f64 = 0.355_028_053_887_817_239;
const AIP0: f64 = -0.258_819_403_792_806_798;

/// `Ai(x)`.
pub fn ai(x: f64) -> f64 {
    airy(x).0
}

/// `Ai'(x)`.
pub fn ai_prime(x: f64) -> f64 {
    airy(x).1
}

/// `(Ai(x), Ai'(x))`.
pub fn airy(x: f64) -> (f64, f64) {
    if x > 5.0 {
        asymptotic_pos(x)
    } else if x < -7.0 {
        asymptotic_neg(-x)
    } else {
        maclaurin(x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut t, mut s) = (1.0, x);
    let (mut u, mut v) = (0.5 * x * x, 1.0);
    fp += u;
    for k in 1..200 {
        let kf = k as f64;
        t *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        s *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        v *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        if k > 1 {
            u *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp += u;
        }
        f += t;
        g += s;
        gp += v;
        if fabs(t) + fabs(s) + fabs(u) + fabs(v) < 1e-18 * (fabs(f) + fabs(g) + 1.0) {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

fn u_coeffs() -> [f64; 20] {
    let mut u = [0.0; 20];
    u[0] = 1.0;
    for k in 1..20 {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
    }
    u
}

fn asymptotic_pos(x: f64) -> (f64, f64) {
    let u = u_coeffs();
    let z = 2.0 / 3.0 * x * sqrt(x);
    let (mut sa, mut sd) = (0.0, 0.0);
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..20 {
        let kf = k as f64;
        let vk = if k == 0 { 1.0 } else { -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k] };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = u[k] / zp;
        if term > last {
            break;
        }
        last = term;
        sa += sign * term;
        sd += sign * vk / zp;
        zp *= z;
    }
    let e = exp(-z) / (2.0 * sqrt(PI));
    let q = sqrt(sqrt(x));
    (e / q * sa, -e * q * sd)
}

fn asymptotic_neg(z: f64) -> (f64, f64) {
    let u = u_coeffs();
    let zeta = 2.0 / 3.0 * z * sqrt(z);
    let (mut p, mut q, mut pd, mut qd) = (0.0, 0.0, 0.0, 0.0);
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..20 {
        let kf = k as f64;
        let vk = if k == 0 { 1.0 } else { -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k] };
        let term = u[k] / zp;
        if term > last {
            break;
        }
        last = term;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
            pd += sign * vk / zp;
        } else {
            q += sign * term;
            qd += sign * vk / zp;
        }
        zp *= zeta;
    }
    let th = zeta + 0.25 * PI;
    let r = sqrt(sqrt(z));
    let a = (sin(th) * p - cos(th) * q) / (sqrt(PI) * r);
    let d = -r / sqrt(PI) * (cos(th) * pd + sin(th) * qd);
    (a, d)
}

/// Constants of the Airy edge layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryConstants {
    /// Largest zero `a_i` of `Ai`.
    pub a_i: f64,
    /// `Ai'(a_i)`.
    pub ai_prime_at_zero: f64,
    /// `J = ∫_{a_i}^∞ Ai(s) ds`.
    pub j: f64,
    /// `c_i = (2π)^{-1/3} J⁻¹ ∫_{a_i}^∞ (s − a_i) Ai(s) ds`.
    pub c_i: f64,
}

impl AiryConstants {
    /// Computes the constants by root finding and quadrature.
    pub fn compute() -> Self {
        let a_i = brent(ai, -2.5, -2.2, 1e-16).unwrap_or(-2.338_107_410_459_767);
        let ai_prime_at_zero = ai_prime(a_i);
        // ∫₀^∞ Ai = 1/3
        let j = 1.0 / 3.0 + integrate(ai, a_i, 0.0, 1e-15);
        // ∫_x^∞ s Ai(s) ds = -Ai'(x) since Ai'' = s Ai
        let moment = -ai_prime_at_zero - a_i * j;
        let c_i = moment / (j * cbrt(2.0 * PI));
        Self { a_i, ai_prime_at_zero, j, c_i }
    }
}
