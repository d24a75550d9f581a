use num_complex::Complex64;
use proptest::prelude::*;
use tunnelcld::potential::{
    evaluate, find_stationary_points, interaction_bounds, presets, PotentialSpec, StationaryKind,
    DEFAULT_BOUNDS_TOLERANCE,
};

/// Stationary energies listed for the gallery, compared as sorted sets
/// (the listed values are rounded to the stated digits).
#[test]
fn gallery_stationary_energies() {
    let listed: [(char, &[f64]); 6] = [
        ('a', &[1.0]),
        ('b', &[1.0]),
        ('c', &[1.0, 0.5, 1.0]),
        ('d', &[0.4, 0.2, 1.0, 0.6, 0.8]),
        ('e', &[0.6, 0.2, 1.0, 0.4, 0.8]),
        ('f', &[1.0, -0.25, 0.5]),
    ];
    for (panel, energies) in listed {
        let spec = presets::gaussian(panel).unwrap();
        let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        let mut found: Vec<f64> = find_stationary_points(&spec, (b.a, b.b)).unwrap().iter().map(|p| p.e0).collect();
        let mut want = energies.to_vec();
        found.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        assert_eq!(found.len(), want.len(), "panel {panel}: {found:?}");
        for (f, w) in found.iter().zip(&want) {
            assert!((f - w).abs() < 3e-3, "panel {panel}: {f} vs {w}");
        }
    }
}

#[test]
fn quartic_top_of_panel_b() {
    let spec = presets::gaussian('b').unwrap();
    let points = find_stationary_points(&spec, (-6.0, 6.0)).unwrap();
    assert_eq!(points.len(), 1);
    let p = points[0];
    assert_eq!((p.order, p.kind), (4, StationaryKind::Maximum));
    // (1 + x^2) exp(-x^2) = 1 - x^4/2 + x^6/3 - ...
    assert!((p.leading_coeff + 0.5).abs() < 1e-9);
}

fn gaussian_strategy() -> impl Strategy<Value = PotentialSpec> {
    (prop::collection::vec(-2.0f64..2.0, 1..6), 0.3f64..3.0).prop_filter_map("nonzero", |(c, eta)| {
        PotentialSpec::gaussian_polynomial(c, eta).ok()
    })
}

proptest! {
    #[test]
    fn mirror_and_negation(spec in gaussian_strategy(), x in -5.0f64..5.0) {
        prop_assert!((spec.mirrored().value(x) - spec.value(-x)).abs() <= 1e-12 * (1.0 + spec.value(-x).abs()));
        prop_assert_eq!(spec.negated().value(x), -spec.value(x));
    }

    #[test]
    fn complex_evaluation_extends_real(spec in gaussian_strategy(), x in -5.0f64..5.0) {
        let z = evaluate(&spec, Complex64::new(x, 0.0)).unwrap();
        prop_assert!((z.re - spec.value(x)).abs() <= 1e-12 * (1.0 + spec.value(x).abs()));
        prop_assert!(z.im.abs() <= 1e-12 * (1.0 + spec.value(x).abs()));
    }

    #[test]
    fn derivative_matches_difference_quotient(spec in gaussian_strategy(), x in -3.0f64..3.0) {
        let h = 1e-5;
        let fd = (spec.value(x + h) - spec.value(x - h)) / (2.0 * h);
        prop_assert!((fd - spec.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()));
        prop_assert!((spec.difference(x + h, x) - (spec.value(x + h) - spec.value(x))).abs() < 1e-14);
    }

    #[test]
    fn stationary_points_are_flat_and_inside_bounds(spec in gaussian_strategy()) {
        let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        if let Ok(points) = find_stationary_points(&spec, (b.a, b.b)) {
            let vmax = spec.max_abs(b.a, b.b);
            for p in points {
                prop_assert!(p.x0 >= b.a && p.x0 <= b.b);
                prop_assert!(spec.derivative(p.x0).abs() < 1e-7 * vmax.max(1.0));
                prop_assert!((spec.value(p.x0) - p.e0).abs() < 1e-12 * vmax.max(1.0));
            }
        }
    }
}
