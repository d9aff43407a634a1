use nlkpp_core::kernel::{make_kernel, KernelSpec, PerturbationKind};
use nlkpp_core::reduced::*;
use nlkpp_core::sturm_liouville::{g_unperturbed, solve_sl, SlProblem, Structure};
use nlkpp_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn plus_root_at_large_diffusivity() {
    let a = 0.125;
    let d = 1e3;
    let s = solve_scalar_fixedpoint(Sign::Plus, a, d).unwrap();
    let asym = 0.5 * PI / d * (2.0 * PI * a).cos() / (1.0 - 16.0 * a * a);
    assert!(((s.i_vector[0] - asym) / asym).abs() < 1e-2);
    assert!(s.residual < 1e-10);
}

#[test]
fn plus_root_inside_bracket() {
    let s = solve_scalar_fixedpoint(Sign::Plus, 0.24, 1e-3).unwrap();
    let (lo, hi) = scalar_bracket(0.24, 1e-3);
    assert!(s.i_vector[0] > lo && s.i_vector[0] < hi);
    assert_eq!(s.structure, Structure::DoubleHump);
}

#[test]
fn minus_root_approaches_its_small_diffusivity_limit() {
    let err = |d: f64| {
        let s = solve_scalar_fixedpoint(Sign::Minus, 0.125, d).unwrap();
        assert_eq!(s.structure, Structure::SingleHump);
        let lim = -0.5 * PI / d;
        ((s.i_vector[0] - lim) / lim).abs()
    };
    let e3 = err(1e-3);
    let e4 = err(1e-4);
    let e5 = err(1e-5);
    assert!(e3 > e4 && e4 > e5);
    assert!(e4 < 0.05 && e5 < 0.02, "{e3} {e4} {e5}");
}

#[test]
fn invalid_inputs() {
    assert!(matches!(solve_scalar_fixedpoint(Sign::Plus, 0.3, 1.0), Err(Error::Domain(_))));
    assert!(matches!(solve_scalar_fixedpoint(Sign::Plus, 0.1, 0.0), Err(Error::Domain(_))));
    assert!(matches!(critical_curves(Sign::Minus, &[1e-3]), Err(Error::Range(_))));
}

#[test]
fn truncated_iteration_reduces_to_scalar_root() {
    let k = KernelSpec::normalized(PerturbationKind::CosPlus).unwrap();
    for &(a, d) in &[(0.2, 0.01), (0.1, 0.5), (0.22, 0.003)] {
        let t = solve_truncated_fixedpoint(&k, a, d, 4).unwrap();
        let s = scalar_i(Sign::Plus, a, d).unwrap();
        assert!((t.i_vector[0] - s).abs() < 1e-9 * s.abs().max(1.0), "a {a} d {d}");
        assert!(t.i_vector[1..].iter().all(|v| v.abs() < 1e-12));
        assert!(t.residual < 1e-10 * (PI / 2.0 / d).max(1.0));
    }
    let k = KernelSpec::normalized(PerturbationKind::CosMinus).unwrap();
    let t = solve_truncated_fixedpoint(&k, 0.15, 0.2, 2).unwrap();
    let s = scalar_i(Sign::Minus, 0.15, 0.2).unwrap();
    assert!((t.i_vector[0] - s).abs() < 1e-9 * s.abs());
}

#[test]
fn truncated_iteration_for_general_kernel() {
    let m = 400;
    let t: Vec<f64> = (0..=m)
        .map(|j| {
            let x = 0.5 * j as f64 / m as f64;
            (2.0 * PI * x).cos() - 0.4 * (6.0 * PI * x).cos()
        })
        .collect();
    let k = KernelSpec::from_table(0.5, t).unwrap();
    let chi = k.chi(8);
    let d = 0.05;
    let s = solve_truncated_fixedpoint(&k, 0.2, d, 8).unwrap();
    assert!(s.residual < 1e-10 * (chi.iter().map(|c| c.abs()).sum::<f64>() / d).max(1.0));
    for (r, i) in s.i_vector.iter().enumerate() {
        assert!(i.abs() <= chi[r + 1].abs() / d * (1.0 + 1e-12));
    }
    let chi_l1: f64 = chi.iter().map(|c| c.abs()).sum();
    let big = solve_truncated_fixedpoint(&k, 0.2, 1e6, 8).unwrap();
    let il1: f64 = big.i_vector.iter().map(|c| c.abs()).sum();
    assert!(il1 < 1e-5 * chi_l1);
}

#[test]
fn zero_potential_projections() {
    let s = solve_sl(&SlProblem::new(0.15, vec![0.0; 6])).unwrap();
    for r in 1..=6 {
        assert!((s.g[r - 1] - g_unperturbed(0.15, r)).abs() < 1e-5);
    }
}

#[test]
fn sign_bounds_hold() {
    for &a in &[0.05, 0.125, 0.2, 0.24] {
        for &d in &[1e-3, 1e-2, 0.1, 1.0] {
            let (lo, hi) = scalar_bracket(a, d);
            let p = scalar_i(Sign::Plus, a, d).unwrap();
            let m = scalar_i(Sign::Minus, a, d).unwrap();
            assert!(p > lo && p < hi, "plus {a} {d}");
            assert!(-m > lo && -m < hi, "minus {a} {d}");
        }
    }
}

#[test]
fn branches_are_monotone() {
    let a_grid: Vec<f64> = (0..8).map(|k| 0.03 + 0.2 * k as f64 / 7.0).collect();
    let d_grid: Vec<f64> = (0..8).map(|k| 10f64.powf(-2.5 + 3.0 * k as f64 / 7.0)).collect();
    for &a in &a_grid {
        for &d in &d_grid {
            let p = |a, d| scalar_i(Sign::Plus, a, d).unwrap();
            let m = |a, d| scalar_i(Sign::Minus, a, d).unwrap();
            assert!(p(a + 1e-3, d) < p(a, d));
            assert!(p(a, d * 1.01) < p(a, d));
            assert!(m(a + 1e-3, d) > m(a, d));
            assert!(m(a, d * 1.01) > m(a, d));
            let ip = p(a, d);
            assert!(jacobian(Sign::Plus, a, ip, d).unwrap() < 0.0);
            let im = m(a, d);
            assert!(jacobian(Sign::Minus, a, im, d).unwrap() > 0.0);
            assert_eq!(solve_scalar_fixedpoint(Sign::Minus, a, d).unwrap().structure, Structure::SingleHump);
        }
    }
}

#[test]
fn hump_boundary_and_structure_map() {
    let ds = d_star().unwrap();
    assert!((ds - 5.22e-3).abs() < 0.05 * 5.22e-3, "{ds}");
    let mut prev = 0.0;
    for &d in &[1e-4, 1e-3, 3e-3] {
        let ac = a_c(d, ds).unwrap();
        assert!(ac > prev);
        prev = ac;
        let below = solve_scalar_fixedpoint(Sign::Plus, ac - 0.01, d).unwrap();
        let above = solve_scalar_fixedpoint(Sign::Plus, (ac + 0.01).min(0.249), d).unwrap();
        assert_eq!(below.structure, Structure::SingleHump);
        assert_eq!(above.structure, Structure::DoubleHump);
    }
    for &a in &[0.05, 0.15, 0.24] {
        let s = solve_scalar_fixedpoint(Sign::Plus, a, 2.0 * ds).unwrap();
        assert_eq!(s.structure, Structure::SingleHump);
    }
    assert!(matches!(a_c(2.0 * ds, ds), Err(Error::Range(_))));
}

#[test]
fn critical_curve_endpoints() {
    let c = critical_curves(Sign::Plus, &[1e-6, 5.1e-3]).unwrap();
    assert!(c.a_c[0] < 0.05);
    assert!(c.a_c[1] > 0.2);
}

#[test]
fn psi_limits() {
    let ci = nlkpp_core::airy::AiryConstants::compute().c_i;
    let big: f64 = 200.0;
    assert!((psi(big).unwrap() / (PI * PI * big.powi(4)) - 1.0).abs() < 1e-3);
    let small: f64 = 1e-3;
    let lead = (PI * PI * ci).powf(0.75) * small.powi(3);
    assert!((psi(small).unwrap() / lead - 1.0).abs() < 1e-2);
    assert!(psi(0.0).is_err());
}

#[test]
fn correction_vanishes_for_top_hat() {
    let c = bvp_correction(&KernelSpec::top_hat(), 0.8, 200).unwrap();
    assert!(c.fbar_half.iter().all(|v| *v == 0.0));
    assert_eq!((c.alpha_bar, c.a_coeff), (0.0, 0.0));
}

#[test]
fn correction_for_unit_plus_kernel() {
    let k = KernelSpec::normalized(PerturbationKind::CosPlus).unwrap();
    let c = bvp_correction(&k, 0.8, 400).unwrap();
    assert!(c.sup_norm() <= 5.0 / 8.0 * PI * PI);
    assert!(c.integral().abs() < 1e-8);
    assert!(c.fbar_half.last().unwrap().abs() < 1e-8);
}

#[test]
fn correction_satisfies_ode() {
    let k = KernelSpec::normalized(PerturbationKind::CosMinus).unwrap();
    let n = 800;
    let c = bvp_correction(&k, 0.7, n).unwrap();
    let h = c.a / n as f64;
    let th2 = (PI / (2.0 * c.a)).powi(2);
    let f0 = PI / (4.0 * c.a);
    for j in (10..n - 10).step_by(37) {
        let x = c.x_half[j];
        let fpp = (c.fbar_half[j + 1] - 2.0 * c.fbar_half[j] + c.fbar_half[j - 1]) / (h * h);
        let fl = f0 * (PI * x / (2.0 * c.a)).cos();
        let rhs = (c.alpha_bar + f0 * c.ibar_half[j]) * fl;
        assert!((fpp + th2 * c.fbar_half[j] - rhs).abs() < 1e-3 * (1.0 + rhs.abs()), "x {x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn correction_invariants(lambda in 0.55f64..0.98, e in 0.05f64..1.0, plus in any::<bool>()) {
        let kind = if plus { PerturbationKind::CosPlus } else { PerturbationKind::CosMinus };
        let k = make_kernel(kind, e).unwrap();
        let c = bvp_correction(&k, lambda, 400).unwrap();
        prop_assert!(c.sup_norm() <= 5.0 / 8.0 * PI * PI);
        prop_assert!(c.integral().abs() < 1e-8);
        prop_assert!(c.fbar_half.last().unwrap().abs() < 1e-8);
    }
}
