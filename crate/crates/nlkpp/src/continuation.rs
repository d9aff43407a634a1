//! Pseudo-arclength continuation of steady states in the plane
//! `(log₁₀ D, log₁₀(−A_W))`.

use faer::Mat;
use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::dogleg::lu_solve;
use crate::error::{Error, Result};
use crate::fpp::{asymmetry, FppProblem};
use crate::spectral::fourier_shift;
use crate::stability::{odd_spectrum, spectrum, Spectrum};
use crate::steady::{BranchPoint, Stability};

const LN10: f64 = std::f64::consts::LN_10;

/// Step control and stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationControls {
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub d_floor: f64,
    pub max_points: usize,
    pub max_arclength: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Spectrum computed at every accepted point.
    pub spectrum: SpectrumMode,
    /// Periodicity defect below which a local minimum is a touch.
    pub touch_tol: f64,
    /// Stop at the first fold in `D`.
    pub stop_at_fold: bool,
}

impl Default for ContinuationControls {
    fn default() -> Self {
        Self {
            ds: 0.02,
            ds_min: 1e-4,
            ds_max: 0.2,
            d_floor: 1e-10,
            max_points: 2000,
            max_arclength: 50.0,
            newton_tol: 1e-9,
            max_newton: 12,
            spectrum: SpectrumMode::Full,
            touch_tol: 0.05,
            stop_at_fold: false,
        }
    }
}

/// Which part of the linearised spectrum continuation computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumMode {
    Off,
    Full,
    /// Odd subspace only (even branches); enough for symmetry breaking.
    OddOnly,
}

/// Where a branch starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Seeded at the neutral curve with this many peaks per cell.
    NeutralCurve(usize),
    SecondaryFrom(usize),
}

/// A known branch used for touch detection: its id and peak count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchTarget {
    pub id: usize,
    pub peaks: usize,
}

/// Events between points `index − 1` and `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Event {
    Fold { d: f64, index: usize },
    BranchTouch { other: usize, d: f64, index: usize },
    StabilityChange { d: f64, index: usize, to: Stability },
    SymmetryBreaking { d: f64, index: usize },
}

impl Event {
    pub fn d(&self) -> f64 {
        match *self {
            Event::Fold { d, .. }
            | Event::BranchTouch { d, .. }
            | Event::StabilityChange { d, .. }
            | Event::SymmetryBreaking { d, .. } => d,
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    DFloor,
    Trivial,
    StepUnderflow,
    PointBudget,
    ArcBudget,
    FoldReached,
    /// Ran into the `λ/k`-periodic family with this id and ended there.
    JoinedBranch { other: usize, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub origin: Origin,
    pub points: Vec<BranchPoint>,
    pub arclength: Vec<f64>,
    pub spectra: Vec<Option<Spectrum>>,
    /// Plane tangent `(d log₁₀D, d log₁₀(−A_W))` at each point.
    pub tangents: Vec<(f64, f64)>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Branch {
    pub fn first_fold(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e {
            Event::Fold { d, .. } => Some(*d),
            _ => None,
        })
    }

    /// First symmetry-breaking event at which an odd mode turns unstable.
    /// Crossings the other way are skipped: for `λ/k`-periodic states odd and
    /// even Bloch modes come in degenerate pairs and cross together.
    pub fn asymmetric_bifurcation(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match *e {
            Event::SymmetryBreaking { d, index } => {
                let odd = |i: usize| self.spectra[i].map_or(f64::NAN, |s| s.odd_max);
                (odd(index - 1) < 0.0 && odd(index) >= 0.0).then_some(d)
            }
            _ => None,
        })
    }

    pub fn min_d(&self) -> f64 {
        self.points.iter().map(|p| p.d).fold(f64::INFINITY, f64::min)
    }

    /// Errors with [`Error::StepUnderflow`] if the run ended that way.
    pub fn check(&self) -> Result<()> {
        if self.termination == Termination::StepUnderflow {
            let d = self.points.last().map_or(f64::NAN, |p| p.d);
            return Err(Error::StepUnderflow { min_step: 0.0, d });
        }
        Ok(())
    }
}

/// Relative defect `max |W − W(· + λ/k)| / max |W|` of `λ/k`-periodicity.
pub fn periodicity_defect(w: &[f64], k: usize) -> f64 {
    let s = fourier_shift(w, 1.0 / k as f64);
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    w.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

fn plane_q(a_w: f64) -> Result<f64> {
    if !(a_w < 0.0) {
        return Err(Error::InvalidState(format!("A_W = {a_w:.3e} is not negative")));
    }
    Ok((-a_w).log10())
}

/// Bordered matrix `[[J, F_p], [rowᵀ, corner]]`.
fn bordered(j: Mat<f64>, fp: &[f64], row: &[f64], corner: f64) -> Mat<f64> {
    let n = j.nrows();
    Mat::from_fn(n + 1, n + 1, |r, c| match (r < n, c < n) {
        (true, true) => j[(r, c)],
        (true, false) => fp[r],
        (false, true) => row[c],
        (false, false) => corner,
    })
}

struct Local {
    /// Derivative of the residual with respect to `p = log₁₀ D`.
    fp: Vec<f64>,
    /// Gradient of `q = log₁₀(−A_W)` with respect to `W`.
    gq: Vec<f64>,
}

fn local(prob: &FppProblem, w: &[f64], d: f64) -> Local {
    let a_w = prob.a_w(w);
    let fp = prob.diffusive_part(w).into_iter().map(|v| v * d * LN10).collect();
    let gq = vec![prob.h / (a_w * LN10); w.len()];
    Local { fp, gq }
}

/// Constraint row on `W` for a tangent `(tw, tp)` with plane part `(tp, tq)`:
/// the plane direction plus the full direction scaled to unit weight.
fn constraint_row(tw: &[f64], tq: f64, gq: &[f64]) -> Vec<f64> {
    let norm2: f64 = tw.iter().map(|t| t * t).sum::<f64>().max(1e-300);
    tw.iter().zip(gq).map(|(t, g)| tq * g + t / norm2).collect()
}

/// Unit plane tangent and full tangent at a converged point.
/// With `prev = None` the tangent is fixed by `dp = direction`.
fn tangent(
    prob: &FppProblem,
    w: &[f64],
    d: f64,
    prev: Option<(&[f64], (f64, f64))>,
    direction: f64,
    even: bool,
) -> Result<(Vec<f64>, f64, (f64, f64))> {
    let j = prob.jacobian(w, d)?;
    let l = local(prob, w, d);
    let n = w.len();
    let (row, corner) = match prev {
        Some((tw, (tp, tq))) => (constraint_row(tw, tq, &l.gq), tp),
        None => (vec![0.0; n], 1.0),
    };
    let m = bordered(j, &l.fp, &row, corner);
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = if prev.is_some() { 1.0 } else { direction };
    let mut z = lu_solve(&m, &rhs).ok_or_else(|| Error::NonConvergence("singular tangent system".into()))?;
    if even {
        symmetrize(&mut z[..n]);
    }
    let tw = &z[..n];
    let tp = z[n];
    let tq: f64 = l.gq.iter().zip(tw).map(|(g, t)| g * t).sum();
    let norm = tp.hypot(tq);
    let mut sign = 1.0 / norm;
    if let Some((_, (pp, _))) = prev {
        let dot: f64 = row.iter().zip(tw).map(|(a, b)| a * b).sum::<f64>() + pp * tp;
        if dot < 0.0 {
            sign = -sign;
        }
    }
    Ok((tw.iter().map(|v| v * sign).collect(), tp * sign, (tp * sign, tq * sign)))
}

/// Newton corrector on the hyperplane through the predictor orthogonal to the
/// tangent `(tw, tp)`; returns the state, iteration count and residual.
fn correct(
    prob: &FppProblem,
    mut w: Vec<f64>,
    mut p: f64,
    tw: &[f64],
    (tp, tq): (f64, f64),
    even: bool,
    ctl: &ContinuationControls,
) -> Result<(Vec<f64>, f64, usize, f64)> {
    let n = w.len();
    let (w_pred, p_pred, q_pred) = (w.clone(), p, plane_q(prob.a_w(&w))?);
    let norm2: f64 = tw.iter().map(|t| t * t).sum::<f64>().max(1e-300);
    let constraint = |w: &[f64], p: f64| -> Result<f64> {
        let q = plane_q(prob.a_w(w))?;
        let dw: f64 = w.iter().zip(&w_pred).zip(tw).map(|((a, b), t)| (a - b) * t).sum();
        Ok(tp * (p - p_pred) + tq * (q - q_pred) + dw / norm2)
    };
    let eval = |w: &[f64], p: f64| -> Result<(Vec<f64>, f64)> {
        let f = prob.residual(w, 10f64.powf(p))?;
        Ok((f, constraint(w, p)?))
    };
    let norm = |f: &[f64], c: f64| f.iter().fold(c.abs(), |m, v| m.max(v.abs()));
    let (mut f, mut c) = eval(&w, p)?;
    for it in 0..ctl.max_newton {
        if norm(&f, c) < ctl.newton_tol {
            return Ok((w, p, it, norm(&f, 0.0)));
        }
        let d = 10f64.powf(p);
        let j = prob.jacobian(&w, d)?;
        let l = local(prob, &w, d);
        let m = bordered(j, &l.fp, &constraint_row(tw, tq, &l.gq), tp);
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        rhs.push(-c);
        let mut dz = lu_solve(&m, &rhs).ok_or_else(|| Error::NonConvergence("singular corrector".into()))?;
        if even {
            // the translation mode is odd; roundoff excites it otherwise
            symmetrize(&mut dz[..n]);
        }
        let old = norm(&f, c);
        debug!("corrector {it}: F {:.3e} constraint {c:.3e}", norm(&f, 0.0));
        let mut step = 1.0;
        loop {
            let wt: Vec<f64> = w.iter().zip(&dz).map(|(a, b)| a + step * b).collect();
            let pt = p + step * dz[n];
            if let Ok((ft, ct)) = eval(&wt, pt) {
                if norm(&ft, ct) < old || step < 0.2 {
                    w = wt;
                    p = pt;
                    f = ft;
                    c = ct;
                    break;
                }
            }
            step *= 0.5;
            if step < 0.1 {
                return Err(Error::NonConvergence("corrector line search failed".into()));
            }
        }
    }
    if norm(&f, c) < ctl.newton_tol {
        return Ok((w, p, ctl.max_newton, norm(&f, 0.0)));
    }
    Err(Error::NonConvergence(format!("corrector: max residual {:.3e}", norm(&f, c))))
}

/// Continues from `start`; `direction < 0` initially decreases `D`.
pub fn continue_branch(
    prob: &FppProblem,
    id: usize,
    origin: Origin,
    start: BranchPoint,
    direction: f64,
    ctl: &ContinuationControls,
    touch_targets: &[TouchTarget],
) -> Result<Branch> {
    let mut start = start;
    let even = is_even(&start.w);
    if even {
        symmetrize(&mut start.w);
    }
    let spec0 = point_spectrum(prob, &start.w, start.d, ctl.spectrum)?;
    if let Some(s) = &spec0 {
        start.stability = s.stability;
        start.max_growth_rate = s.max_growth_rate;
    }
    let (mut tw, mut tp, mut tpl) = tangent(prob, &start.w, start.d, None, direction.signum(), even)?;
    let mut br = Branch {
        id,
        origin,
        points: vec![start],
        arclength: vec![0.0],
        spectra: vec![spec0],
        tangents: vec![tpl],
        events: Vec::new(),
        termination: Termination::PointBudget,
    };
    let mut defects: Vec<Vec<f64>> =
        touch_targets.iter().map(|t| vec![periodicity_defect(&br.points[0].w, t.peaks)]).collect();
    let mut ds = ctl.ds;
    let mut s_total = 0.0;
    while br.points.len() < ctl.max_points {
        let last = br.points.last().expect("branch has a start");
        let wp: Vec<f64> = last.w.iter().zip(&tw).map(|(a, b)| a + ds * b).collect();
        let pp = last.d.log10() + ds * tp;
        let attempt = correct(prob, wp, pp, &tw, tpl, even, ctl).and_then(|(mut w, p, iters, res)| {
            if even {
                symmetrize(&mut w);
            }
            let landed = touch_targets
                .iter()
                .enumerate()
                .any(|(k, t)| defects[k].last().is_some_and(|&d0| d0 > LANDING) && periodicity_defect(&w, t.peaks) < LANDING);
            if landed {
                return Err(Error::NonConvergence("corrector jumped onto a crossing branch".into()));
            }
            Ok((w, p, iters, res))
        });
        match attempt {
            Ok((w, p, iters, res)) => {
                let d = 10f64.powf(p);
                let mut pt = BranchPoint::from_solution(prob, w, d, res);
                let sp = point_spectrum(prob, &pt.w, d, ctl.spectrum)?;
                if let Some(s) = &sp {
                    pt.stability = s.stability;
                    pt.max_growth_rate = s.max_growth_rate;
                }
                let (ntw, ntp, ntpl) = tangent(prob, &pt.w, d, Some((&tw, tpl)), 1.0, even)?;
                s_total += ds;
                debug!("s = {s_total:.4} D = {d:.4e} A_W = {:.4e} iters {iters} ds {ds:.2e}", pt.a_w);
                for (k, t) in touch_targets.iter().enumerate() {
                    defects[k].push(periodicity_defect(&pt.w, t.peaks));
                }
                br.points.push(pt);
                br.arclength.push(s_total);
                br.spectra.push(sp);
                br.tangents.push(ntpl);
                let i = br.points.len() - 1;
                detect_events(&mut br, i, &defects, touch_targets, ctl);
                tw = ntw;
                tp = ntp;
                tpl = ntpl;
                if iters <= 3 {
                    ds = (2.0 * ds).min(ctl.ds_max);
                } else if iters >= 8 {
                    ds = (0.5 * ds).max(ctl.ds_min);
                }
                let cur = &br.points[i];
                if cur.d < ctl.d_floor {
                    br.termination = Termination::DFloor;
                    break;
                }
                if cur.w.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-4 {
                    br.termination = Termination::Trivial;
                    break;
                }
                if s_total > ctl.max_arclength {
                    br.termination = Termination::ArcBudget;
                    break;
                }
                if ctl.stop_at_fold && br.events.iter().any(|e| matches!(e, Event::Fold { .. })) {
                    br.termination = Termination::FoldReached;
                    break;
                }
            }
            Err(e) => {
                debug!("step {ds:.2e} rejected: {e}");
                ds *= 0.5;
                if ds < ctl.ds_min {
                    let joined = touch_targets
                        .iter()
                        .enumerate()
                        .find(|(k, _)| defects[*k].last().is_some_and(|&v| v < JOIN_TOL));
                    br.termination = match joined {
                        Some((_, t)) => Termination::JoinedBranch { other: t.id, d: last.d },
                        None => {
                            info!("continuation stopped: step underflow at D = {:.4e}", last.d);
                            Termination::StepUnderflow
                        }
                    };
                    break;
                }
            }
        }
    }
    Ok(br)
}

/// Defect below which a state is taken to lie on a `λ/k`-periodic family.
const LANDING: f64 = 1e-7;

/// Defect at a step underflow that marks the end of a branch on another family.
const JOIN_TOL: f64 = 1e-3;

fn point_spectrum(prob: &FppProblem, w: &[f64], d: f64, mode: SpectrumMode) -> Result<Option<Spectrum>> {
    Ok(match mode {
        SpectrumMode::Off => None,
        SpectrumMode::Full => Some(spectrum(prob, w, d)?),
        SpectrumMode::OddOnly => Some(odd_spectrum(prob, w, d)?),
    })
}

fn is_even(w: &[f64]) -> bool {
    asymmetry(w) < 1e-6 * w.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Replaces `w` by its even part about node `0`.
fn symmetrize(w: &mut [f64]) {
    let n = w.len();
    for i in 1..n / 2 + 1 {
        let m = 0.5 * (w[i] + w[n - i]);
        w[i] = m;
        w[n - i] = m;
    }
}

fn detect_events(br: &mut Branch, i: usize, defects: &[Vec<f64>], targets: &[TouchTarget], ctl: &ContinuationControls) {
    let (a, b) = (&br.points[i - 1], &br.points[i]);
    let (ta, tb) = (br.tangents[i - 1], br.tangents[i]);
    let ds = br.arclength[i] - br.arclength[i - 1];
    if ta.0 * tb.0 < 0.0 {
        // linear interpolation of dp/ds locates the turning point
        let frac = ta.0 / (ta.0 - tb.0);
        let p = a.d.log10() + 0.5 * ta.0 * frac * ds;
        let p = if ta.0 < 0.0 { p.min(a.d.log10()).min(b.d.log10()) } else { p.max(a.d.log10()).max(b.d.log10()) };
        br.events.push(Event::Fold { d: 10f64.powf(p), index: i });
    }
    let geo = (a.d * b.d).sqrt();
    if a.stability != b.stability && a.stability != Stability::Unknown && b.stability != Stability::Unknown {
        br.events.push(Event::StabilityChange { d: geo, index: i, to: b.stability });
    }
    if let (Some(sa), Some(sb)) = (&br.spectra[i - 1], &br.spectra[i]) {
        if sa.symmetric && sb.symmetric && sa.odd_max.signum() != sb.odd_max.signum() {
            let frac = sa.odd_max / (sa.odd_max - sb.odd_max);
            let p = a.d.log10() + frac * (b.d.log10() - a.d.log10());
            br.events.push(Event::SymmetryBreaking { d: 10f64.powf(p), index: i });
        }
    }
    if i >= 2 {
        for (k, t) in targets.iter().enumerate() {
            let (d0, d1, d2) = (defects[k][i - 2], defects[k][i - 1], defects[k][i]);
            if d1 < d0 && d1 <= d2 && d1 < ctl.touch_tol {
                let s = &br.arclength;
                let ml = (d0 - d1) / (s[i - 1] - s[i - 2]);
                let mr = (d2 - d1) / (s[i] - s[i - 1]);
                // the defect is |linear| through the touch; the steeper side is unbiased
                let (lo, hi, sstar) = if ml >= mr {
                    (i - 1, i, s[i - 1] + d1 / ml)
                } else {
                    (i - 2, i - 1, s[i - 1] - d1 / mr)
                };
                let frac = ((sstar - s[lo]) / (s[hi] - s[lo])).clamp(0.0, 1.0);
                let (pl, ph) = (br.points[lo].d.log10(), br.points[hi].d.log10());
                let d = 10f64.powf(pl + frac * (ph - pl));
                br.events.push(Event::BranchTouch { other: t.id, d, index: i - 1 });
            }
        }
    }
}
