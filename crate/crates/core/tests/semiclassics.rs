use proptest::prelude::*;
use std::f64::consts::PI;
use tunnelcld::potential::{
    find_stationary_points, interaction_bounds, presets, InteractionBounds, PhysicalScales, PotentialSpec,
    StationaryKind, DEFAULT_BOUNDS_TOLERANCE,
};
use tunnelcld::semiclassics::{
    classical_times, fit_singularity, predict_rectangular, predict_singularity, reconstruct_phase,
    singular_energies, smoothed_cld,
};

fn unit() -> PhysicalScales {
    PhysicalScales::new(1.0, 1.0).unwrap()
}

fn bounds(spec: &PotentialSpec) -> InteractionBounds {
    interaction_bounds(spec, DEFAULT_BOUNDS_TOLERANCE).unwrap()
}

fn far_from(e: f64, singular: &[f64]) -> bool {
    e.abs() > 1e-3 && singular.iter().all(|s| (e - s).abs() > 1e-3)
}

#[test]
fn quadratic_minimum_step_from_curvature() {
    // curvature from a difference quotient, independent of the Taylor code
    let s = unit();
    for panel in ['c', 'd', 'f'] {
        let spec = presets::gaussian(panel).unwrap();
        let b = bounds(&spec);
        for p in find_stationary_points(&spec, (b.a, b.b)).unwrap() {
            if p.kind != StationaryKind::Minimum {
                continue;
            }
            let h = 1e-4;
            let c = (spec.value(p.x0 + h) - 2.0 * spec.value(p.x0) + spec.value(p.x0 - h)) / (2.0 * h * h);
            let expected = PI * (s.mass / (2.0 * c)).sqrt();
            let fit = fit_singularity(&spec, &s, &b, &predict_singularity(&p)).unwrap();
            assert!(fit.pass(), "panel {panel} at {}", p.x0);
            assert!((fit.re.step.unwrap() / expected - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn parabolic_barrier_log_coefficient() {
    // t+ ~ sqrt(m / 2|c|) ln|E - E0|^{-1} for V = E0 - |c| x^2 + ...
    let spec = presets::gaussian('a').unwrap();
    let p = find_stationary_points(&spec, (-6.0, 6.0)).unwrap()[0];
    let fit = fit_singularity(&spec, &unit(), &bounds(&spec), &predict_singularity(&p)).unwrap();
    let expected = (0.5f64).sqrt();
    for got in [fit.re.log_coefficient_below, fit.re.log_coefficient_above] {
        assert!((got.unwrap() / expected - 1.0).abs() < 0.01);
    }
    assert!((fit.im.step.unwrap() + PI * expected).abs() < 1e-3 * PI);
}

#[test]
fn square_barrier_edges_are_inverse_square_roots() {
    let spec = presets::square_barrier();
    let fit = fit_singularity(&spec, &unit(), &bounds(&spec), &predict_rectangular(1.0)).unwrap();
    assert!(fit.pass());
    assert!((fit.re.exponent_above.unwrap() + 0.5).abs() < 1e-6);
    assert!((fit.im.exponent_below.unwrap() + 0.5).abs() < 1e-6);
}

#[test]
fn phase_vanishes_at_zero_energy() {
    let spec = presets::gaussian('f').unwrap();
    let s = PhysicalScales::from_kappa(1.0, 20.0).unwrap();
    let b = bounds(&spec);
    let singular = singular_energies(&spec, &b).unwrap();
    let grid: Vec<f64> = (0..=700)
        .map(|i| -0.2 + 0.002 * i as f64 + 1e-4)
        .filter(|&e| far_from(e, &singular))
        .collect();
    let points = smoothed_cld(&spec, &s, &b, &grid).unwrap();
    let values: Vec<_> = points.iter().map(|p| p.value).collect();
    let phase = reconstruct_phase(&grid, &values).unwrap();
    let k = grid.iter().position(|&e| e > 0.0).unwrap();
    let t = -grid[k - 1] / (grid[k] - grid[k - 1]);
    let at_zero = phase.phase[k - 1].re + t * (phase.phase[k].re - phase.phase[k - 1].re);
    assert!(at_zero.abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inversion_swaps_allowed_and_forbidden(e in 0.05f64..1.4, panel in 0usize..6) {
        let spec = presets::gaussian(presets::PANELS[panel]).unwrap();
        let b = bounds(&spec);
        prop_assume!(far_from(e, &singular_energies(&spec, &b).unwrap()));
        let direct = classical_times(&spec, &unit(), &b, e).unwrap();
        let inverted = classical_times(&spec.negated(), &unit(), &b, -e).unwrap();
        prop_assert!((direct.t_plus - inverted.t_minus).abs() <= 1e-8 * direct.t_plus.max(1.0));
        prop_assert!((direct.t_minus - inverted.t_plus).abs() <= 1e-8 * direct.t_minus.max(1.0));
    }

    #[test]
    fn times_are_ordered(e in -0.5f64..2.0) {
        // V >= 0 everywhere for panel (a)
        let spec = presets::gaussian('a').unwrap();
        let b = bounds(&spec);
        prop_assume!(far_from(e, &[1.0]));
        let t = classical_times(&spec, &unit(), &b, e).unwrap();
        prop_assert!(t.t_plus >= 0.0 && t.t_minus >= 0.0);
        if e > 1.0 {
            prop_assert_eq!(t.t_minus, 0.0);
            prop_assert!(t.t_plus > t.t_zero);
        } else if e > 0.0 {
            prop_assert!(t.t_minus > 0.0);
        } else {
            prop_assert_eq!(t.t_plus, 0.0);
            prop_assert!(t.t_minus < t.t_zero);
        }
    }

    #[test]
    fn density_scales_inversely_with_hbar(e in 0.05f64..1.4, hbar in 0.01f64..1.0) {
        let spec = presets::gaussian('d').unwrap();
        let b = bounds(&spec);
        prop_assume!(far_from(e, &singular_energies(&spec, &b).unwrap()));
        let s1 = PhysicalScales::new(1.0, hbar).unwrap();
        let d1 = smoothed_cld(&spec, &s1, &b, &[e]).unwrap()[0].value;
        let d0 = smoothed_cld(&spec, &unit(), &b, &[e]).unwrap()[0].value;
        prop_assert!((d1 * hbar - d0).norm() <= 1e-12 * d0.norm().max(1.0));
    }
}
