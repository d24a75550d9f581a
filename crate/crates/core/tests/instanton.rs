use num_complex::Complex64;
use proptest::prelude::*;
use tunnelcld::instanton::{accumulated_times, integrate, Segment, SWITCH_TOLERANCE};
use tunnelcld::potential::{interaction_bounds, presets, PhysicalScales, DEFAULT_BOUNDS_TOLERANCE};
use tunnelcld::semiclassics::{classical_times, singular_energies};

fn unit() -> PhysicalScales {
    PhysicalScales::new(1.0, 1.0).unwrap()
}

#[test]
fn symmetric_barriers_switch_symmetrically() {
    for (panel, e) in [('a', 0.5), ('b', 0.7), ('c', 0.3), ('c', 0.7)] {
        let spec = presets::gaussian(panel).unwrap();
        let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        let r = integrate(&spec, &unit(), &b, e, b.a, 1e4, b.width() / 20_000.0).unwrap();
        let xs: Vec<f64> = r.switch_points.iter().map(|p| p.x).collect();
        assert!(!xs.is_empty() && xs.len() % 2 == 0);
        for (l, rgt) in xs.iter().zip(xs.iter().rev()) {
            assert!((l + rgt).abs() < 1e-9, "panel {panel}: {xs:?}");
        }
    }
}

#[test]
fn clock_direction_follows_segment() {
    let spec = presets::gaussian('e').unwrap();
    let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
    let r = integrate(&spec, &unit(), &b, 0.5, b.a, 1e4, b.width() / 20_000.0).unwrap();
    for i in 1..r.len() {
        if r.segment[i] != r.segment[i - 1] {
            continue;
        }
        let rate = (r.time[i] - r.time[i - 1]) / (r.s[i] - r.s[i - 1]);
        let want = match r.segment[i] {
            Segment::Allowed => Complex64::new(1.0, 0.0),
            Segment::Forbidden => Complex64::new(0.0, -1.0),
        };
        assert!((rate - want).norm() < 1e-9);
    }
    for p in &r.switch_points {
        assert!(p.residual < SWITCH_TOLERANCE);
        let i = r.s.iter().position(|&s| s == p.s).unwrap();
        assert!(r.momentum[i].norm() < 1e-8);
    }
}

#[test]
fn real_positions_and_monotone_progress() {
    let spec = presets::gaussian('d').unwrap();
    let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
    let r = integrate(&spec, &unit(), &b, 0.3, b.a, 1e4, b.width() / 20_000.0).unwrap();
    assert!(r.completed);
    assert!(r.position.windows(2).all(|w| w[1] >= w[0]));
    assert!((r.position.last().unwrap() - b.b).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectory_times_equal_quadrature(e in 0.05f64..1.4, panel in 0usize..6) {
        let spec = presets::gaussian(presets::PANELS[panel]).unwrap();
        let b = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        prop_assume!(singular_energies(&spec, &b).unwrap().iter().all(|s| (e - s).abs() > 1e-3));
        let r = integrate(&spec, &unit(), &b, e, b.a, 1e4, b.width() / 20_000.0).unwrap();
        let (tp, tm) = accumulated_times(&r).unwrap();
        let t = classical_times(&spec, &unit(), &b, e).unwrap();
        prop_assert!((tp - t.t_plus).abs() < 1e-6);
        prop_assert!((tm - t.t_minus).abs() < 1e-6);
    }
}
