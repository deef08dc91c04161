mod common;

use std::sync::Arc;

use isoflow::curves::SampledCurve;
use isoflow::error::Error;
use isoflow::geom::{Mat2, Vec2};
use isoflow::onewell;
use isoflow::potentials::{CallablePotential, GridSpec, Potential};
use isoflow::twowell::{minimize, MinimizeOptions, StartKind, TwoWellProblem};
use isoflow::wave::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn axis_profile() -> (Potential, TravelingWaveProfile) {
    let pot = Potential::separable_example();
    let pts = (0..=800).map(|k| Vec2::new(-1.0 + 2.0 * k as f64 / 800.0, 0.0)).collect();
    let curve = SampledCurve::from_points(pts).unwrap();
    let profile = to_profile(&curve, &pot).unwrap();
    (pot, profile)
}

fn manufactured(lam: f64, nu: f64) -> (Potential, TravelingWaveProfile) {
    common::manufactured_linear_wave(lam, nu, 1e-3)
}

#[test]
fn constant_curve_is_rejected() {
    assert!(matches!(SampledCurve::from_points(vec![Vec2::new(1.0, 0.0); 5]), Err(Error::EmptyCurve(_))));
}

#[test]
fn curve_through_a_zero_of_w_is_rejected() {
    let pot = Potential::separable_example();
    let pts = [(-1.0, 0.0), (0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 0.0)];
    let curve = SampledCurve::from_points(pts.iter().map(|(x, y)| Vec2::new(*x, *y)).collect()).unwrap();
    assert!(matches!(to_profile(&curve, &pot), Err(Error::Degenerate(_))));
}

#[test]
fn one_well_piece_is_equipartitioned() {
    let pot = Potential::quadratic(Vec2::new(0.3, -0.2), Mat2::new(1.0, 0.4, 0.4, 3.0)).unwrap();
    let well = pot.well_data(0).unwrap();
    let sol = onewell::isoperimetric(&well, Vec2::new(1.2, 0.5), 0.4, 4096, None).unwrap();
    let profile = to_profile(&sol.curve, &pot).unwrap();
    let n = profile.len();
    for i in 1..n - 1 {
        let w = pot.value(profile.u[i]);
        let ratio = profile.du[i].norm() / (2f64.sqrt() * w.sqrt());
        assert!((ratio - 1.0).abs() < 1e-5, "node {i}: ratio {ratio}");
    }
}

#[test]
fn axis_profile_decays_at_linear_rate() {
    let (_, profile) = axis_profile();
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (y, u) in profile.y_grid.iter().zip(&profile.u) {
        let gap = 1.0 - u.x;
        if u.x >= 0.5 && gap > 1e-9 {
            let l = gap.ln();
            sx += y;
            sy += l;
            sxx += y * y;
            sxy += y * l;
            m += 1.0;
        }
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    assert!((slope + 2f64.sqrt()).abs() < 1e-3, "slope {slope}");
}

#[test]
fn standing_wave_has_no_speed() {
    let (pot, profile) = axis_profile();
    let (nu, res) = estimate_speed(&profile, &pot).unwrap();
    assert!(nu.abs() <= 1e-3);
    assert!(res <= 1e-3 * profile.gradient_norm);
    let c = conserved_checks(&profile, 0.0, &pot);
    assert!(c.applicable && c.rotation_integral <= 1e-4);
}

#[test]
fn manufactured_speed_is_recovered() {
    for (lam, nu) in [(1.0, 1.3), (2.0, 0.4), (0.5, 1.9)] {
        let (pot, profile) = manufactured(lam, nu);
        let (fit, _) = estimate_speed(&profile, &pot).unwrap();
        assert!((fit - nu).abs() <= 1e-6, "nu {nu}: fitted {fit}");
    }
}

#[test]
fn manufactured_solution_satisfies_integrals() {
    let (pot, profile) = manufactured(1.0, 1.3);
    let c = conserved_checks(&profile, 1.3, &pot);
    assert!(c.applicable && c.nodes == profile.len());
    assert!(c.energy_integral <= 1e-6);
    assert!(c.rotation_integral <= 1e-6);
    assert!(c.modulus_integral <= 1e-6);
    // with the middle coefficient doubled the identity fails
    assert!(c.modulus_integral_half_coefficient > 1e-3);
}

#[test]
fn resting_profile_has_zero_residuals_and_energy() {
    let pot = Potential::separable_example();
    let y: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
    let u = vec![Vec2::new(1.0, 0.0); 20];
    let profile = TravelingWaveProfile::from_samples(y, u, None, &pot).unwrap();
    assert_eq!(hamiltonian_energy(&profile, &pot), 0.0);
    let c = conserved_checks(&profile, 0.7, &pot);
    assert_eq!((c.energy_integral, c.rotation_integral, c.modulus_integral), (0.0, 0.0, 0.0));
    assert!(c.nodes == 20);
}

#[test]
fn integrals_need_a_radial_well() {
    let pot = Potential::separable(2.0).unwrap();
    let (_, profile) = axis_profile();
    let c = conserved_checks(&profile, 0.0, &pot);
    assert!(!c.applicable);
}

#[test]
fn hamiltonian_bounds_scaled_length() {
    let pot = Potential::separable_example();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let n = 50 + rng.gen_range(0..100);
        let mut y = vec![0.0];
        for _ in 1..n {
            let last = *y.last().unwrap();
            y.push(last + rng.gen_range(0.01..0.2));
        }
        let (a, b) = (rng.gen_range(0.1..1.5), rng.gen_range(-0.5..0.5));
        let u = y
            .iter()
            .map(|t| Vec2::new(-1.0 + 2.0 * t / y[n - 1], b * (a * t).sin()))
            .collect();
        let profile = TravelingWaveProfile::from_samples(y, u, None, &pot).unwrap();
        let h = hamiltonian_energy(&profile, &pot);
        assert!(h >= 2f64.sqrt() * path_energy(&profile, &pot));
    }
}

#[test]
fn minimizer_profile_matches_energy_and_multiplier() {
    let pot = Potential::separable_example();
    let opts = MinimizeOptions { starts: vec![StartKind::Segment], ..MinimizeOptions::default() };
    let problem = TwoWellProblem::new(pot.clone(), 0.03, 401, opts).unwrap();
    let r = minimize(&problem, None).unwrap();
    let profile = to_profile(&r.curve, &pot).unwrap();
    let target = 2f64.sqrt() * r.energy;
    assert!((profile.h_value - target).abs() <= 1e-4 * profile.h_value);
    assert!(profile.equipartition_residual <= 1e-4 * profile.max_w);
    assert!((profile.nu - r.multiplier).abs() <= 0.05 * r.multiplier.abs());
    assert!(profile.end_gaps.0 <= 1e-6 && profile.end_gaps.1 <= 1e-6);
    assert!((profile.window.0 + profile.window.1).abs() < 1e-9);
}

#[test]
fn spectrum_examples() {
    let well = Potential::quadratic(Vec2::zeros(), Mat2::identity()).unwrap().well_data(0).unwrap();
    let r = speed_spectrum(&well, 0.0).unwrap();
    assert_eq!(r.regime, Regime::RealDecay);
    let s = 2f64.sqrt();
    for (m, e) in r.eigenvalues.iter().zip([-s, -s, s, s]) {
        assert!((m.re - e).abs() < 1e-10 && m.im.abs() < 1e-10);
    }
    let r = speed_spectrum(&well, 3.0).unwrap();
    assert!(!r.speed_admissible && r.regime == Regime::OscillatoryNoWave);
    assert!(r.eigenvalues.iter().all(|m| m.re.abs() <= 1e-10 && m.im.abs() > 0.1));
    // boundaries at 2 (1 - 3)^2 = 8 and 2 (1 + 3)^2 = 32
    let reg = |nu2: f64| spectrum_for_rates(1.0, 3.0, nu2.sqrt()).unwrap().regime;
    assert_eq!(reg(7.99), Regime::RealDecay);
    assert_eq!(reg(8.01), Regime::SpiralDecay);
    assert_eq!(reg(31.99), Regime::SpiralDecay);
    assert_eq!(reg(32.01), Regime::OscillatoryNoWave);
}

struct TwoQuadratics;

impl CallablePotential for TwoQuadratics {
    fn value(&self, p: Vec2) -> f64 {
        let left = (p.x + 1.0).powi(2) + 4.0 * p.y * p.y;
        let right = (p.x - 1.0).powi(2) + 9.0 * p.y * p.y;
        0.25 * left * right
    }
}

#[test]
fn speed_limit_examples() {
    let r = speed_limits(&Potential::separable_example()).unwrap();
    assert!((r.limit - 8.0).abs() < 1e-12);
    assert_eq!(r.radial.len(), 2);
    assert!(r.radial.iter().all(|b| b.bound_linear == 8.0 && b.bound_squared == 8.0));

    let pot = Potential::callable(vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)], Arc::new(TwoQuadratics)).unwrap();
    let r = speed_limits(&pot).unwrap();
    assert!((r.wells[0].limit - 18.0).abs() < 1e-5 && (r.wells[1].limit - 32.0).abs() < 1e-5);
    assert!((r.limit - 18.0).abs() < 1e-5);
    assert!(r.radial.is_empty());

    let quad = Potential::quadratic(Vec2::zeros(), Mat2::identity() * 3.0).unwrap();
    let r = speed_limits(&quad).unwrap();
    assert_eq!((r.radial[0].bound_linear, r.radial[0].bound_squared), (24.0, 72.0));
}

#[test]
fn heteroclinic_second_variation() {
    let (pot, profile) = axis_profile();
    let s = second_variation_spectrum(&profile, &pot, 3000).unwrap();
    let z = s.zero_mode.expect("zero mode");
    assert_eq!(z, 0);
    assert!(s.zero_mode_correlation >= 0.99);
    assert!(s.next_eigenvalue.unwrap() >= 0.1 * s.lambda_ref);
    assert!(s.eigenvalues.iter().filter(|v| v.abs() <= 1e-4 * s.lambda_ref).count() == 1);
    assert!(s.end_spectrum_min.iter().all(|v| *v >= s.lambda_ref));

    let moved = profile.translated(3.25);
    let t = second_variation_spectrum(&moved, &pot, 3000).unwrap();
    for (a, b) in s.eigenvalues.iter().zip(&t.eigenvalues) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    let hyp = pot.check_hypotheses(&GridSpec::default());
    let k = hyp.apriori_k;
    assert!(profile.u.iter().all(|p| p.norm() <= k));
    assert!(k * k >= pot.wells().iter().map(|w| w.norm_squared()).fold(0.0, f64::max));
}

#[test]
fn second_variation_needs_decayed_ends() {
    let (pot, profile) = axis_profile();
    let keep: Vec<usize> = (0..profile.len()).filter(|&i| profile.y_grid[i].abs() <= 1.5).collect();
    let cut = TravelingWaveProfile::from_samples(
        keep.iter().map(|&i| profile.y_grid[i]).collect(),
        keep.iter().map(|&i| profile.u[i]).collect(),
        None,
        &pot,
    )
    .unwrap();
    assert!(matches!(second_variation_spectrum(&cut, &pot, 1000), Err(Error::Grid(_))));
    assert!(matches!(second_variation_spectrum(&profile, &pot, 100), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn numeric_spectrum_matches_closed_form(l1 in 0.1f64..3.0, l2 in 0.1f64..3.0, nu in -8.0f64..8.0) {
        let r = spectrum_for_rates(l1, l2, nu).unwrap();
        prop_assert!(r.closed_form_residual <= 1e-10, "residual {}", r.closed_form_residual);
        let v = nu * nu;
        let upper = 2.0 * (l1 + l2) * (l1 + l2);
        if v >= upper * (1.0 + 1e-6) {
            prop_assert!(r.eigenvalues.iter().all(|m| m.re.abs() <= 1e-10));
        }
        if v < upper * (1.0 - 1e-6) {
            prop_assert!(r.eigenvalues.iter().any(|m| m.re < -1e-6));
        }
    }
}
