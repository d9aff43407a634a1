use nalgebra::DMatrix;
use nlkpp_core::airy::{ai, AiryConstants};
use nlkpp_core::quad;
use nlkpp_core::sturm_liouville::*;
use nlkpp_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Smallest eigenvalue of the unsymmetrized finite-difference operator,
/// from a dense general eigensolver.
fn dense_alpha(a: f64, i1: f64, n: usize) -> f64 {
    let h = a / n as f64;
    let ih2 = 1.0 / (h * h);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let x = j as f64 * h;
        m[(j, j)] = 2.0 * ih2 + i1 * (2.0 * PI * x).cos();
        if j + 1 < n {
            m[(j, j + 1)] = if j == 0 { -2.0 * ih2 } else { -ih2 };
        }
        if j > 0 {
            m[(j, j - 1)] = -ih2;
        }
    }
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

#[test]
fn free_problem_eigenvalue() {
    let s = solve_sl(&SlProblem::scalar(0.125, 0.0)).unwrap();
    let exact = 16.0 * PI * PI;
    assert!(((s.alpha_l - exact) / exact).abs() < 1e-6);
    assert_eq!(s.structure, Structure::SingleHump);
}

#[test]
fn free_problem_eigenfunction_and_projection() {
    let a = 0.125;
    let s = solve_sl(&SlProblem::scalar(a, 0.0)).unwrap();
    for (x, f) in s.x_half.iter().zip(&s.f_half) {
        let exact = PI / (4.0 * a) * (PI * x / (2.0 * a)).cos();
        assert!((f - exact).abs() < 1e-5 * exact.max(1.0), "x = {x}");
    }
    let g = 4.0 / 3.0 * (PI / 4.0).cos();
    assert!((s.g[0] - g).abs() < 1e-4);
    assert!((g - 0.94281).abs() < 1e-5);
    assert!((s.mass() - 1.0).abs() < 1e-10);
}

#[test]
fn unperturbed_projections_match_closed_form() {
    let s = solve_sl(&SlProblem::new(0.2, vec![0.0; 5])).unwrap();
    for r in 1..=5 {
        assert!((s.g[r - 1] - g_unperturbed(0.2, r)).abs() < 1e-5, "r = {r}");
    }
}

#[test]
fn eigenvalue_matches_dense_oracle() {
    let s = solve_sl(&SlProblem::scalar(0.125, 50.0)).unwrap();
    let o = dense_alpha(0.125, 50.0, DEFAULT_GRID);
    assert!(((s.alpha_l - o) / o).abs() < 1e-6, "{} vs {o}", s.alpha_l);
}

#[test]
fn second_order_grid_convergence() {
    let alpha = |n| solve_sl(&SlProblem::scalar(0.2, 20.0).with_grid(n)).unwrap().alpha_l;
    let reference = alpha(12_800);
    let e1 = alpha(100) - reference;
    let e2 = alpha(200) - reference;
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn eigenfunction_is_even_positive_and_vanishes_at_edge() {
    let s = solve_sl(&SlProblem::new(0.18, vec![300.0, -40.0])).unwrap();
    let f = s.f_full();
    let n = f.len();
    assert_eq!(f[0], 0.0);
    assert_eq!(f[n - 1], 0.0);
    for j in 0..n {
        assert_eq!(f[j], f[n - 1 - j]);
    }
    assert!(f[1..n - 1].iter().all(|v| *v > 0.0));
}

#[test]
fn half_width_outside_range_is_rejected() {
    assert!(matches!(solve_sl(&SlProblem::scalar(0.25, 1.0)), Err(Error::Domain(_))));
    assert!(matches!(solve_sl(&SlProblem::scalar(0.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn g1_profile_matches_unperturbed_value() {
    let g = g1_profile(0.125, &[-10.0, 0.0, 10.0]).unwrap();
    assert!((g[1] - 0.94281).abs() < 1e-4);
    assert!(g[0] > g[1] && g[1] > g[2]);
}

#[test]
fn airy_constants_match_quadrature_and_root_finding() {
    let c = AiryConstants::compute();
    let j = quad::integrate(ai, c.a_i, 40.0, 1e-12);
    assert!((c.j - j).abs() < 1e-6);
    assert!((c.j - 1.274).abs() < 5e-4 && (c.a_i + 2.338).abs() < 5e-4);
    assert!(ai(c.a_i).abs() < 1e-12);
    let ci = quad::integrate(|s| (s - c.a_i) * ai(s), c.a_i, 40.0, 1e-12) / ((2.0 * PI).cbrt() * c.j);
    assert!(c.c_i > 0.0);
    assert!((c.c_i - ci).abs() < 1e-8);
}

#[test]
fn gaussian_profile_has_unit_mass() {
    let AsymptoticProfile::GaussCentre(g) = asymptotic_profiles(Regime::GaussCentre, 0.1, -1.0).unwrap() else {
        panic!("wrong regime")
    };
    let m = quad::integrate(|x| g.eval(x), -20.0, 20.0, 1e-13);
    assert!((m - 1.0).abs() < 1e-10);
}

#[test]
fn airy_profile_has_unit_mass_per_edge_pair() {
    let p = airy_edge(0.125);
    let m = quad::integrate(|x| p.eval(x), 0.0, 30.0, 1e-13);
    assert!((m - 0.5).abs() < 1e-8);
}

#[test]
fn regime_ranges_are_checked() {
    assert!(matches!(asymptotic_profiles(Regime::AiryEdge, 0.1, -5.0), Err(Error::Range(_))));
    assert!(matches!(asymptotic_profiles(Regime::GaussCentre, 0.1, 5.0), Err(Error::Range(_))));
    assert!(matches!(asymptotic_profiles(Regime::SmallA, 0.2, 5.0), Err(Error::Range(_))));
    assert!(matches!(asymptotic_profiles(Regime::NearQuarter, 0.1, 5.0), Err(Error::Range(_))));
}

#[test]
fn small_a_eigenvalue_limits() {
    let a0 = small_a_alpha(0.0, 1000).unwrap();
    assert!((a0 - PI * PI / 4.0).abs() < 1e-9);
    let neg = small_a_alpha(8.0 * PI, 1000).unwrap();
    assert!(neg < 0.0);
    // dense oracle on the same rescaled problem
    let n = 400;
    let h = 1.0 / n as f64;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let x = j as f64 * h;
        m[(j, j)] = 2.0 / (h * h) - 2.0 * PI * PI * 8.0 * PI * x * x;
        if j + 1 < n {
            m[(j, j + 1)] = if j == 0 { -2.0 } else { -1.0 } / (h * h);
        }
        if j > 0 {
            m[(j, j - 1)] = -1.0 / (h * h);
        }
    }
    let oracle = m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    assert!(oracle < 0.0);
    assert!((small_a(8.0 * PI, n).unwrap().alpha_hat - oracle).abs() < 1e-8 * oracle.abs());
}

#[test]
fn splitting_width_of_small_cores() {
    let a0 = compute_a0().unwrap();
    assert!((a0 - 0.849).abs() < 0.005, "{a0}");
}

#[test]
fn eigenvalue_slopes_at_large_amplitude() {
    let a = 0.125;
    let i = 1e6;
    let s = solve_sl(&SlProblem::scalar(a, i).with_grid(4000)).unwrap();
    let approx = airy_edge(a).alpha_approx(i);
    // next correction is O(I^{1/3}), about 2e-3 relative here
    assert!(((s.alpha_l - approx) / approx).abs() < 5e-3, "{} vs {approx}", s.alpha_l);
    let AsymptoticProfile::GaussCentre(g) = asymptotic_profiles(Regime::GaussCentre, a, -i).unwrap() else {
        panic!("wrong regime")
    };
    let s = solve_sl(&SlProblem::scalar(a, -i).with_grid(4000)).unwrap();
    assert!(((s.alpha_l - g.alpha_approx(-i)) / i).abs() < 1e-4);
}

#[test]
fn structure_flips_where_margin_changes_sign() {
    let a = 0.2;
    let mut prev: Option<(f64, Structure)> = None;
    for k in 0..60 {
        let i = 10f64.powf(0.1 * k as f64);
        let s = solve_sl(&SlProblem::scalar(a, i)).unwrap();
        let margin = s.alpha_l - i;
        let expected = if margin < 0.0 { Structure::DoubleHump } else { Structure::SingleHump };
        assert_eq!(s.structure, expected);
        if let Some((pm, ps)) = prev {
            assert_eq!(pm * margin < 0.0, ps != s.structure);
        }
        prev = Some((margin, s.structure));
    }
    assert_eq!(prev.unwrap().1, Structure::DoubleHump);
}

#[test]
fn g1_monotone_and_bounded_on_sample_grid() {
    for ii in 0..10 {
        let i = -100.0 + 200.0 * ii as f64 / 9.0;
        for ja in 0..10 {
            let a = 0.05 + 0.17 * ja as f64 / 9.0;
            let g = |i: f64, a: f64| solve_sl(&SlProblem::scalar(a, i)).unwrap().g[0];
            let g0 = g(i, a);
            assert!(g0 > 0.0 && g0 < 1.0, "G1({i}, {a}) = {g0}");
            assert!(g(i + 0.5, a) - g(i - 0.5, a) < 0.0);
            assert!(g(i, a + 1e-3) - g(i, a - 1e-3) < 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenpair_bounds(a in 0.02f64..0.24, i1 in -500.0f64..500.0, i2 in -100.0f64..100.0, i3 in -50.0f64..50.0) {
        let iv = vec![i1, i2, i3];
        let s = solve_sl(&SlProblem::new(a, iv.clone())).unwrap();
        let l1: f64 = iv.iter().map(|v| v.abs()).sum();
        // at the maximum of F the curvature is non-positive, so α ≥ Q there
        let (jm, _) = s.f_half.iter().enumerate().fold((0, 0.0), |b, (j, v)| if *v > b.1 { (j, *v) } else { b });
        let qm = potential(&iv, s.x_half[jm]);
        prop_assert!(s.alpha_l >= qm - 1e-3 * l1.max(1.0));
        if s.structure == Structure::SingleHump {
            prop_assert!(s.alpha_l >= potential(&iv, 0.0));
        }
        prop_assert!((s.mass() - 1.0).abs() < 1e-10);
        for (r, g) in s.g.iter().enumerate() {
            let r = (r + 1) as f64;
            prop_assert!(g.abs() <= 1.0 + 1e-12);
            prop_assert!(g.abs() <= (l1 + s.alpha_l.abs()) / (2.0 * r * r * PI * PI) * (1.0 + 1e-3) + 1e-6);
        }
    }
}
