use std::f64::consts::PI;

use nlkpp::evolution::{
    evolve, front_position, front_speed, localized_bump, periodicity_defect, wavelength_of, BoxGrid, EvolutionControls,
};
use nlkpp::Error;
use nlkpp_core::kernel::{make_kernel, KernelSpec, PerturbationKind};
use proptest::prelude::*;

fn short(t_end: f64) -> EvolutionControls {
    EvolutionControls { t_end, ..Default::default() }
}

#[test]
fn equilibria_stay_put() {
    let grid = BoxGrid::new(40.0, 4096).unwrap();
    let spec = make_kernel(PerturbationKind::CosPlus, 0.3).unwrap();
    let one = evolve(&vec![1.0; 4096], &grid, 2e-3, &spec, &short(2.0)).unwrap();
    assert!(one.u.iter().all(|u| (u - 1.0).abs() < 1e-12));
    let zero = evolve(&vec![0.0; 4096], &grid, 2e-3, &spec, &short(2.0)).unwrap();
    assert!(zero.u.iter().all(|u| *u == 0.0));
}

#[test]
fn commensurate_periodic_data_stays_periodic() {
    let grid = BoxGrid::new(40.0, 8192).unwrap();
    let spec = make_kernel(PerturbationKind::CosMinus, 0.2).unwrap();
    let period = 0.625;
    let u0: Vec<f64> = grid.x().iter().map(|x| 1.0 + 0.3 * (2.0 * PI * x / period).cos()).collect();
    let st = evolve(&u0, &grid, 1e-3, &spec, &short(5.0)).unwrap();
    assert!(periodicity_defect(&st.u, &grid, period).unwrap() < 1e-9);
}

#[test]
fn top_hat_front_moves_at_the_linear_speed() {
    let d = 1e-3;
    let grid = BoxGrid::for_diffusivity(40.0, d).unwrap();
    let st = evolve(&localized_bump(&grid), &grid, d, &KernelSpec::top_hat(), &short(60.0)).unwrap();
    let (c, r2) = front_speed(&st.front_positions, 30.0).expect("front recorded");
    let c_lin = 2.0 * d.sqrt();
    assert!(r2 > 0.99);
    assert!((c - c_lin).abs() < 0.1 * c_lin, "{c} vs {c_lin}");
    assert!(!st.clip_flag);
}

#[test]
fn oversized_data_blows_up() {
    let grid = BoxGrid::new(40.0, 4096).unwrap();
    let r = evolve(&vec![11.0; 4096], &grid, 2e-3, &KernelSpec::top_hat(), &short(1.0));
    assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
}

#[test]
fn grids_must_resolve_the_diffusion_length() {
    assert!(BoxGrid::new(30.0, 4096).is_err());
    assert!(BoxGrid::new(40.0, 3000).is_err());
    let grid = BoxGrid::new(40.0, 4096).unwrap();
    let r = evolve(&vec![1.0; 4096], &grid, 1e-5, &KernelSpec::top_hat(), &short(1.0));
    assert!(matches!(r, Err(Error::Grid(_))), "{r:?}");
}

#[test]
fn front_of_a_step_is_its_midpoint() {
    let x: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
    let u: Vec<f64> = x.iter().map(|x| if *x < 4.95 { 1.0 } else { 0.0 }).collect();
    assert!((front_position(&u, &x).unwrap() - 4.95).abs() < 1e-12);
    assert!(matches!(front_position(&[0.0; 10], &x[..10]), Err(Error::NoFront)));
}

#[test]
fn cosine_signal_of_half_wavelength_is_measured_exactly() {
    let dx = 1.0 / 1024.0;
    let s: Vec<f64> = (0..4096).map(|i| 1.0 + (2.0 * PI * i as f64 * dx / 0.5).cos()).collect();
    let w = wavelength_of(&s, dx).unwrap();
    assert!((w.wavelength - 0.5).abs() < 1e-12, "{w:?}");
    assert!(!w.disordered);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wavelength_estimators_agree_on_clean_signals(periods in 4usize..40, phase in 0.0f64..6.28) {
        let (m, dx) = (4096, 1.0 / 512.0);
        let lambda = m as f64 * dx / periods as f64;
        let s: Vec<f64> = (0..m).map(|i| (2.0 * PI * i as f64 * dx / lambda + phase).cos()).collect();
        let w = wavelength_of(&s, dx).unwrap();
        prop_assert!((w.fourier_estimate - lambda).abs() < 1e-9 * lambda);
        prop_assert!((w.crossing_estimate - lambda).abs() < 0.05 * lambda);
        prop_assert!(!w.disordered);
    }
}
