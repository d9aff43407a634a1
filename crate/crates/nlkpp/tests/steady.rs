use std::f64::consts::PI;

use nlkpp::acceptance::{jacobian_fd_error, wnl_gap};
use nlkpp::bifurcation::{exp_small_minimum, find_dmin, fold_outcome, k_peak_seed, k_peak_start, FoldOutcome};
use nlkpp::continuation::{continue_branch, ContinuationControls, Origin, SpectrumMode};
use nlkpp::fpp::{asymmetry, count_peaks, FppProblem};
use nlkpp::stability::spectrum;
use nlkpp::steady::{solve_fpp, SolveOptions, Stability};
use nlkpp::Error;
use nlkpp_core::dispersion::neutral_d;
use nlkpp_core::kernel::{make_kernel, KernelSpec, PerturbationKind};
use proptest::prelude::*;

fn plus(e: f64) -> KernelSpec {
    make_kernel(PerturbationKind::CosPlus, e).unwrap()
}

#[test]
fn jacobian_matches_central_differences() {
    assert!(jacobian_fd_error(512, 1e-6).unwrap() < 1e-6);
}

#[test]
fn undeflated_solve_from_zero_returns_uniform_state() {
    let p = FppProblem::new(&plus(0.01), 0.95, 256).unwrap();
    let opts = SolveOptions { deflate_trivial: false, ..Default::default() };
    let pt = solve_fpp(&p, &[0.0; 256], 1e-3, &[], &opts).unwrap();
    assert!(pt.w.iter().all(|w| w.abs() < 1e-14));
}

#[test]
fn converged_state_agrees_with_weakly_nonlinear_amplitude() {
    assert!(wnl_gap(0.01, 0.95, 0.98).unwrap() < 0.05);
}

#[test]
fn deflation_keeps_away_from_uniform_state() {
    let p = FppProblem::new(&plus(0.01), 0.95, 512).unwrap();
    let pt = k_peak_start(&p, 1).unwrap();
    let w_max = pt.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    assert!(w_max > 1e-3, "{w_max}");
    assert!(pt.residual_norm < 1e-9);
    assert!(pt.a_w < 0.0);
    assert_eq!(pt.n_peaks, 1);
}

#[test]
fn deflating_a_known_state_rejects_it() {
    let p = FppProblem::new(&plus(0.01), 0.95, 256).unwrap();
    let pt = k_peak_start(&p, 1).unwrap();
    let r = solve_fpp(&p, &pt.w, pt.d, &[pt.w.clone()], &SolveOptions::default());
    assert!(matches!(r, Err(Error::ConvergedToDeflated { .. }) | Err(Error::NonConvergence(_))), "{r:?}");
}

#[test]
fn even_fraction_seeds_are_rejected() {
    let p = FppProblem::new(&plus(0.01), 0.95, 256).unwrap();
    assert!(matches!(k_peak_seed(&p, 2, 0.02), Err(Error::InvalidState(_))));
}

#[test]
fn three_peak_seed_has_three_peaks() {
    let p = FppProblem::new(&plus(0.01), 0.95, 512).unwrap();
    let pt = k_peak_start(&p, 3).unwrap();
    assert_eq!(count_peaks(&pt.w), 3);
    assert!(pt.d < neutral_d(&plus(0.01), 0.95 / 3.0));
}

#[test]
fn uniform_state_spectrum_follows_dispersion() {
    let spec = plus(0.0);
    let p = FppProblem::new(&spec, 0.9, 256).unwrap();
    let dp = neutral_d(&spec, 0.9);
    assert_eq!(spectrum(&p, &[0.0; 256], 0.5 * dp).unwrap().stability, Stability::Unstable);
    assert_eq!(spectrum(&p, &[0.0; 256], 2.0 * dp).unwrap().stability, Stability::Stable);
}

#[test]
fn branch_stays_symmetric_and_translation_mode_vanishes() {
    let p = FppProblem::new(&plus(0.01), 0.95, 512).unwrap();
    let ctl = ContinuationControls { max_points: 25, ..Default::default() };
    let br = continue_branch(&p, 0, Origin::NeutralCurve(1), k_peak_start(&p, 1).unwrap(), -1.0, &ctl, &[]).unwrap();
    for (pt, s) in br.points.iter().zip(&br.spectra) {
        assert!(asymmetry(&pt.w) < 1e-6);
        assert!(pt.residual_norm < 1e-9);
        assert!(s.unwrap().translation.abs() < 1e-6);
    }
    assert!(br.points.windows(2).all(|w| w[1].d < w[0].d), "no fold this close to onset");
}

#[test]
fn fold_is_reproduced_with_half_the_initial_step() {
    let p = FppProblem::new(&plus(0.01), 0.95, 512).unwrap();
    let ctl = ContinuationControls { spectrum: SpectrumMode::Off, ..Default::default() };
    let a = find_dmin(&p, &ctl).unwrap();
    let b = find_dmin(&p, &ContinuationControls { ds: 0.5 * ctl.ds, ..ctl }).unwrap();
    assert!((a - b).abs() < 0.05 * a, "{a:e} {b:e}");
    assert!(a > 0.7e-6 && a < 2.8e-6, "{a:e}");
}

#[test]
fn top_hat_branch_has_no_fold() {
    let p = FppProblem::new(&KernelSpec::top_hat(), 0.95, 512).unwrap();
    let ctl = ContinuationControls { spectrum: SpectrumMode::Off, d_floor: 1e-8, ..Default::default() };
    assert_eq!(fold_outcome(&p, &ctl).unwrap(), FoldOutcome::NoFold);
}

#[test]
fn exponentially_small_region_is_positive_above_the_fold() {
    let p = FppProblem::new(&plus(0.01), 0.95, 512).unwrap();
    let ctl = ContinuationControls { spectrum: SpectrumMode::Off, d_floor: 2e-5, ..Default::default() };
    let br = continue_branch(&p, 0, Origin::NeutralCurve(1), k_peak_start(&p, 1).unwrap(), -1.0, &ctl, &[]).unwrap();
    let last = br.points.last().unwrap();
    let (c, _) = exp_small_minimum(&p, &last.w).expect("state has an exponentially small region");
    assert!(c > 0.0, "{c}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn uniform_state_is_an_equilibrium(e in 0.0f64..0.9, l in 0.55f64..0.99, d in 1e-6f64..1e-1) {
        let p = FppProblem::new(&plus(e), l, 256).unwrap();
        let r = p.residual(&[0.0; 256], d).unwrap();
        prop_assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn jacobian_action_matches_matrix(a in -1.0f64..1.0, b in -1.0f64..1.0, e in 0.0f64..0.5) {
        let p = FppProblem::new(&plus(e), 0.8, 256).unwrap();
        let x = p.x();
        let w: Vec<f64> = x.iter().map(|x| a * (2.0 * PI * x / 0.8).cos() + b * (4.0 * PI * x / 0.8).sin()).collect();
        let v: Vec<f64> = x.iter().map(|x| (6.0 * PI * x / 0.8).cos() + 0.3).collect();
        let j = p.jacobian(&w, 1e-3).unwrap();
        let act = p.jacobian_action(&w, 1e-3, &v).unwrap();
        for (i, ai) in act.iter().enumerate() {
            let dense: f64 = (0..256).map(|k| j[(i, k)] * v[k]).sum();
            prop_assert!((dense - ai).abs() < 1e-9 * (1.0 + ai.abs()));
        }
    }

    #[test]
    fn spectrum_of_shifted_state_is_unchanged(shift in 1usize..255) {
        let p = FppProblem::new(&plus(0.01), 0.95, 256).unwrap();
        let pt = k_peak_start(&p, 1).unwrap();
        let mut s = pt.w.clone();
        s.rotate_left(shift);
        let a = spectrum(&p, &pt.w, pt.d).unwrap();
        let b = spectrum(&p, &s, pt.d).unwrap();
        prop_assert!((a.max_growth_rate - b.max_growth_rate).abs() < 1e-8, "{a:?} {b:?}");
    }
}
