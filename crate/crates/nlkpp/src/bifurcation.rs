//! Branch seeding at the neutral curve, bifurcation diagrams and `D_min`.

use log::{info, warn};
use nlkpp_core::dispersion::{neutral_d, wnl_seed};
use serde::{Deserialize, Serialize};

use crate::continuation::{continue_branch, Branch, ContinuationControls, Event, Origin, TouchTarget};
use crate::error::{Error, Result};
use crate::fpp::FppProblem;
use crate::steady::{log_profile, solve_fpp, BranchPoint, SolveOptions};

/// Relative distance below the onset at which branches are seeded.
pub const SEED_OFFSET: f64 = 0.02;

/// Peak families traced by default.
pub const DEFAULT_FAMILIES: [usize; 4] = [1, 3, 5, 7];

/// Weakly nonlinear seed with `k` peaks per cell: the `λ/k` profile tiled `k` times.
pub fn k_peak_seed(prob: &FppProblem, k: usize, offset: f64) -> Result<(Vec<f64>, f64)> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidState(format!("no {k}-peak branch: even fractions of the cell have no periodic states")));
    }
    let sub = prob.lambda / k as f64;
    let d0 = neutral_d(&prob.spec, sub);
    if !(d0 > 0.0) {
        return Err(Error::InvalidState(format!("wavelength {sub:.6} lies outside every tongue")));
    }
    let d = (1.0 - offset) * d0;
    let s = wnl_seed(&prob.spec, sub, d)?;
    let u: Vec<f64> = prob
        .x()
        .iter()
        .map(|x| 1.0 + s.amplitude * (2.0 * std::f64::consts::PI * x / sub).cos())
        .collect();
    Ok((log_profile(&u), d))
}

/// Converged `k`-peak state just below its onset.
pub fn k_peak_start(prob: &FppProblem, k: usize) -> Result<BranchPoint> {
    let (seed, d) = k_peak_seed(prob, k, SEED_OFFSET)?;
    solve_fpp(prob, &seed, d, &[], &SolveOptions::default())
}

/// Traces the branch of each family from its onset towards small `D`.
/// Families whose seed does not exist are skipped with a warning.
pub fn bifurcate(prob: &FppProblem, families: &[usize], ctl: &ContinuationControls) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    for (id, &k) in families.iter().enumerate() {
        let start = match k_peak_start(prob, k) {
            Ok(p) => p,
            Err(e @ (Error::InvalidState(_) | Error::Core(_))) => {
                warn!("skipping {k}-peak family: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let targets: Vec<TouchTarget> = families
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m != k && m % k == 0)
            .map(|(other, &m)| TouchTarget { id: other, peaks: m })
            .collect();
        info!("continuing {k}-peak branch from D = {:.4e}", start.d);
        out.push(continue_branch(prob, id, Origin::NeutralCurve(k), start, -1.0, ctl, &targets)?);
    }
    Ok(out)
}

/// Smallest `D` of the one-peak branch, reached at its first fold.
pub fn find_dmin(prob: &FppProblem, ctl: &ContinuationControls) -> Result<f64> {
    let ctl = ContinuationControls { stop_at_fold: true, ..ctl.clone() };
    let start = k_peak_start(prob, 1)?;
    let br = continue_branch(prob, 0, Origin::NeutralCurve(1), start, -1.0, &ctl, &[])?;
    let fold = br.events.iter().find_map(|e| match e {
        Event::Fold { d, index } => Some((*d, *index)),
        _ => None,
    });
    match fold {
        Some((d, index)) => {
            let prefix = br.points[..index].iter().map(|p| p.d).fold(f64::INFINITY, f64::min);
            Ok(d.min(prefix))
        }
        None => {
            br.check()?;
            Err(Error::NoFoldFound { d_floor: ctl.d_floor })
        }
    }
}

/// `C(x) = (φ * e^W)(x) − 1`; a zero inside an exponentially small region
/// signals the birth of a new peak.
pub fn exp_small_criterion(prob: &FppProblem, w: &[f64]) -> Vec<f64> {
    prob.nonlocal(w).into_iter().map(|v| v - 1.0).collect()
}

/// Level of `W` below which a point is in the exponentially small region.
pub const EXP_SMALL_LEVEL: f64 = -10.0;

/// Minimum of `C` over `W < −10` and its node, if the region is non-empty.
pub fn exp_small_minimum(prob: &FppProblem, w: &[f64]) -> Option<(f64, usize)> {
    let c = exp_small_criterion(prob, w);
    w.iter()
        .zip(&c)
        .enumerate()
        .filter(|(_, (w, _))| **w < EXP_SMALL_LEVEL)
        .map(|(i, (_, c))| (*c, i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Outcome class of a `D_min` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FoldOutcome {
    Fold(f64),
    NoFold,
}

/// [`find_dmin`] with the no-fold case as a value.
pub fn fold_outcome(prob: &FppProblem, ctl: &ContinuationControls) -> Result<FoldOutcome> {
    match find_dmin(prob, ctl) {
        Ok(d) => Ok(FoldOutcome::Fold(d)),
        Err(Error::NoFoldFound { .. }) => Ok(FoldOutcome::NoFold),
        Err(e) => Err(e),
    }
}

/// One-peak state at diffusivity `d`, reached by continuing from onset.
/// Errors with `InvalidState` if the branch folds back before reaching `d`.
pub fn one_peak_at(prob: &FppProblem, d: f64, ctl: &ContinuationControls) -> Result<BranchPoint> {
    let start = k_peak_start(prob, 1)?;
    if start.d <= d {
        return solve_fpp(prob, &start.w, d, &[], &SolveOptions::default());
    }
    let ctl = ContinuationControls { d_floor: d, stop_at_fold: true, ..ctl.clone() };
    let br = continue_branch(prob, 0, Origin::NeutralCurve(1), start, -1.0, &ctl, &[])?;
    if br.first_fold().is_some() {
        return Err(Error::InvalidState(format!("one-peak branch folds above D = {d:.3e}")));
    }
    br.check()?;
    let near = br
        .points
        .iter()
        .min_by(|a, b| (a.d / d).ln().abs().total_cmp(&(b.d / d).ln().abs()))
        .expect("branch has points");
    solve_fpp(prob, &near.w, d, &[], &SolveOptions::default())
}
