//! Powell dogleg trust-region method for square nonlinear systems with a dense Jacobian.

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};

/// Square system `F(x) = 0`.
pub trait NonlinearSystem {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&mut self, x: &[f64]) -> Result<Mat<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoglegOptions {
    /// Stop once `max |F| < ftol`.
    pub ftol: f64,
    pub max_iter: usize,
    /// Initial trust radius as a multiple of `max(1, |x0|)`.
    pub radius_factor: f64,
    pub min_radius: f64,
}

impl Default for DoglegOptions {
    fn default() -> Self {
        Self { ftol: 1e-9, max_iter: 100, radius_factor: 1.0, min_radius: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoglegReport {
    pub x: Vec<f64>,
    pub residual_max: f64,
    pub iterations: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

pub(crate) fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let xc = Col::from_fn(x.len(), |i| x[i]);
    let y = a * &xc;
    (0..a.nrows()).map(|i| y[i]).collect()
}

fn matvec_t(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let xc = Col::from_fn(x.len(), |i| x[i]);
    let y = a.transpose() * &xc;
    (0..a.ncols()).map(|i| y[i]).collect()
}

/// Solves `J p = rhs` by partial-pivoting LU; `None` if the result is not finite.
pub(crate) fn lu_solve(j: &Mat<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = Col::from_fn(rhs.len(), |i| rhs[i]);
    let sol = j.partial_piv_lu().solve(&b);
    let out: Vec<f64> = (0..rhs.len()).map(|i| sol[i]).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Runs the dogleg iteration from `x0`.
pub fn dogleg<S: NonlinearSystem>(sys: &mut S, x0: &[f64], opts: &DoglegOptions) -> Result<DoglegReport> {
    let mut x = x0.to_vec();
    let mut f = sys.residual(&x)?;
    let mut fnorm = norm2(&f);
    let mut radius = opts.radius_factor * norm2(&x).max(1.0);
    let mut jac: Option<Mat<f64>> = None;
    for it in 0..opts.max_iter {
        if max_abs(&f) < opts.ftol {
            return Ok(DoglegReport { residual_max: max_abs(&f), x, iterations: it });
        }
        let j = match jac.take() {
            Some(j) => j,
            None => sys.jacobian(&x)?,
        };
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let p_gn = lu_solve(&j, &neg_f);
        let g = matvec_t(&j, &f);
        let jg = matvec(&j, &g);
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        let jgnorm2: f64 = jg.iter().map(|v| v * v).sum();
        let p_sd: Vec<f64> = if jgnorm2 > 0.0 {
            g.iter().map(|v| -gnorm2 / jgnorm2 * v).collect()
        } else {
            vec![0.0; x.len()]
        };
        loop {
            let p = dogleg_step(p_gn.as_deref(), &p_sd, &g, radius);
            let pnorm = norm2(&p);
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            let predicted = {
                let jp = matvec(&j, &p);
                let lin: Vec<f64> = f.iter().zip(&jp).map(|(a, b)| a + b).collect();
                fnorm * fnorm - norm2(&lin).powi(2)
            };
            let ft = sys.residual(&trial).ok().filter(|r| r.iter().all(|v| v.is_finite()));
            let (rho, ftn) = match &ft {
                Some(r) => {
                    let n = norm2(r);
                    (if predicted > 0.0 { (fnorm * fnorm - n * n) / predicted } else { -1.0 }, n)
                }
                None => (-1.0, f64::INFINITY),
            };
            if rho < 0.25 {
                radius = 0.25 * pnorm.min(radius);
            } else if rho > 0.75 && pnorm >= 0.99 * radius {
                radius *= 2.0;
            }
            if rho > 1e-4 {
                x = trial;
                f = ft.expect("accepted step has a residual");
                fnorm = ftn;
                break;
            }
            if radius < opts.min_radius * norm2(&x).max(1.0) {
                return Err(Error::NonConvergence(format!(
                    "trust radius collapsed after {it} iterations (max |F| = {:.3e})",
                    max_abs(&f)
                )));
            }
        }
    }
    if max_abs(&f) < opts.ftol {
        return Ok(DoglegReport { residual_max: max_abs(&f), x, iterations: opts.max_iter });
    }
    Err(Error::NonConvergence(format!("{} iterations, max |F| = {:.3e}", opts.max_iter, max_abs(&f))))
}

fn dogleg_step(p_gn: Option<&[f64]>, p_sd: &[f64], g: &[f64], radius: f64) -> Vec<f64> {
    if let Some(gn) = p_gn {
        if norm2(gn) <= radius {
            return gn.to_vec();
        }
    }
    let sd = norm2(p_sd);
    if sd >= radius || p_gn.is_none() {
        let gn = norm2(g);
        if gn == 0.0 {
            return vec![0.0; g.len()];
        }
        return g.iter().map(|v| -radius / gn * v).collect();
    }
    // point on the segment p_sd + τ (p_gn − p_sd) at distance `radius`
    let gn = p_gn.expect("checked above");
    let diff: Vec<f64> = gn.iter().zip(p_sd).map(|(a, b)| a - b).collect();
    let a: f64 = diff.iter().map(|v| v * v).sum();
    let b: f64 = 2.0 * diff.iter().zip(p_sd).map(|(d, s)| d * s).sum::<f64>();
    let c = sd * sd - radius * radius;
    let tau = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    p_sd.iter().zip(&diff).map(|(s, d)| s + tau * d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl NonlinearSystem for Rosenbrock {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }
        fn jacobian(&mut self, x: &[f64]) -> Result<Mat<f64>> {
            Ok(Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => -20.0 * x[0],
                (0, 1) => 10.0,
                (1, 0) => -1.0,
                _ => 0.0,
            }))
        }
    }

    #[test]
    fn solves_rosenbrock_residual() {
        let r = dogleg(&mut Rosenbrock, &[-1.2, 1.0], &DoglegOptions { ftol: 1e-12, ..Default::default() }).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-10 && (r.x[1] - 1.0).abs() < 1e-10);
    }

    struct NoRoot;

    impl NonlinearSystem for NoRoot {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] + 1.0])
        }
        fn jacobian(&mut self, x: &[f64]) -> Result<Mat<f64>> {
            Ok(Mat::from_fn(1, 1, |_, _| 2.0 * x[0]))
        }
    }

    #[test]
    fn reports_failure_without_root() {
        let r = dogleg(&mut NoRoot, &[3.0], &DoglegOptions { max_iter: 50, ..Default::default() });
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }
}
