use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use tunnelcld::potential::{interaction_bounds, presets, PhysicalScales, PotentialSpec, DEFAULT_BOUNDS_TOLERANCE};
use tunnelcld::scattering::{amplitudes, density_from_phase, oracle_density, phase_curve, transmit};
use tunnelcld::semiclassics::eisenbud_wigner;

type C = Complex64;

/// Textbook transmission probability of a square barrier of width `2w`.
fn square_barrier_probability(v0: f64, w: f64, mass: f64, hbar: f64, e: f64) -> f64 {
    let d = 2.0 * w;
    if e < v0 {
        let q = (2.0 * mass * (v0 - e)).sqrt() / hbar;
        1.0 / (1.0 + v0 * v0 * (q * d).sinh().powi(2) / (4.0 * e * (v0 - e)))
    } else {
        let q = (2.0 * mass * (e - v0)).sqrt() / hbar;
        1.0 / (1.0 + v0 * v0 * (q * d).sin().powi(2) / (4.0 * e * (e - v0)))
    }
}

/// Transmission probability by direct RK4 integration of the Schroedinger
/// equation from the right (pure outgoing wave) to the left.
fn shooting_probability(spec: &PotentialSpec, mass: f64, hbar: f64, e: f64) -> f64 {
    let b = interaction_bounds(spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
    let k = (2.0 * mass * e).sqrt() / hbar;
    let n = 200_000;
    let h = -(b.b - b.a) / n as f64;
    let f = |x: f64, psi: C, dpsi: C| (dpsi, 2.0 * mass / (hbar * hbar) * (spec.value(x) - e) * psi);
    let (mut x, mut psi, mut dpsi) = (b.b, C::new(0.0, k * b.b).exp(), C::i() * k * C::new(0.0, k * b.b).exp());
    for _ in 0..n {
        let (a1, b1) = f(x, psi, dpsi);
        let (a2, b2) = f(x + 0.5 * h, psi + 0.5 * h * a1, dpsi + 0.5 * h * b1);
        let (a3, b3) = f(x + 0.5 * h, psi + 0.5 * h * a2, dpsi + 0.5 * h * b2);
        let (a4, b4) = f(x + h, psi + h * a3, dpsi + h * b3);
        psi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        dpsi += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        x += h;
    }
    // psi = A e^{ikx} + B e^{-ikx} on the left
    let incoming = (psi + dpsi / (C::i() * k)) / (2.0 * C::new(0.0, k * x).exp());
    1.0 / incoming.norm_sqr()
}

#[test]
fn square_barrier_matches_textbook() {
    let spec = presets::square_barrier();
    let s = PhysicalScales::new(1.0, 0.6).unwrap();
    for e in [0.2, 0.5, 0.9, 1.3, 2.0] {
        let r = transmit(&spec, &s, e).unwrap();
        let want = square_barrier_probability(1.0, 5.0, 1.0, 0.6, e);
        assert!((r.transmission_probability() / want - 1.0).abs() < 1e-10, "E = {e}");
    }
}

#[test]
fn gallery_matches_shooting() {
    let s = PhysicalScales::new(1.0, 0.3).unwrap();
    for panel in ['a', 'd', 'f'] {
        let spec = presets::gaussian(panel).unwrap();
        for e in [0.3, 0.7, 1.2] {
            let got = transmit(&spec, &s, e).unwrap().transmission_probability();
            let want = shooting_probability(&spec, 1.0, 0.3, e);
            assert!((got / want - 1.0).abs() < 1e-7, "panel {panel}, E = {e}: {got} vs {want}");
        }
    }
}

#[test]
fn free_motion_has_no_phase() {
    let s = PhysicalScales::new(1.0, 1.0).unwrap();
    let curve = phase_curve(&PotentialSpec::Zero, &s, &[0.1, 0.5, 1.0]).unwrap();
    for r in &curve.results {
        assert_eq!(r.alpha, C::new(0.0, 0.0));
        assert!((r.beta - 1.0).norm() < 1e-15);
        assert!(r.phi.norm() < 1e-15);
    }
    assert!(density_from_phase(&curve).unwrap().iter().all(|d| d.norm() < 1e-12));
}

#[test]
fn imaginary_time_shift_is_log_derivative_of_probability() {
    let spec = presets::square_barrier();
    let (m, hbar) = (1.0, 0.6);
    let s = PhysicalScales::new(m, hbar).unwrap();
    for e in [0.3, 0.8, 1.5] {
        let shift = eisenbud_wigner(oracle_density(&spec, &s, C::new(e, 0.0)).unwrap(), &s);
        let h = 1e-5;
        let lnt = |x: f64| square_barrier_probability(1.0, 5.0, m, hbar, x).ln();
        let want = -0.5 * hbar * (lnt(e + h) - lnt(e - h)) / (2.0 * h);
        assert!((shift.im - want).abs() < 1e-6 * (1.0 + want.abs()), "E = {e}: {} vs {want}", shift.im);
    }
}

#[test]
fn grid_density_agrees_with_pointwise_oracle() {
    let spec = presets::gaussian('a').unwrap();
    let s = PhysicalScales::new(1.0, 0.2).unwrap();
    let grid: Vec<f64> = (0..=400).map(|i| 0.3 + 0.002 * i as f64).collect();
    let curve = phase_curve(&spec, &s, &grid).unwrap();
    let dens = density_from_phase(&curve).unwrap();
    for j in (20..380).step_by(40) {
        let pointwise = oracle_density(&spec, &s, C::new(grid[j], 0.0)).unwrap();
        let scale = pointwise.norm().max(1.0);
        assert!((dens[j] - pointwise).norm() < 1e-3 * scale, "E = {}", grid[j]);
    }
    // the phase grows by pi per unit of integrated real density
    let total: f64 = dens.windows(2).zip(grid.windows(2)).map(|(d, g)| 0.5 * (d[0].re + d[1].re) * (g[1] - g[0])).sum();
    let rise = curve.results.last().unwrap().phi.re - curve.results[0].phi.re;
    assert!((PI * total - rise).abs() < 1e-3 * rise.abs().max(1.0));
}

#[test]
fn unresolved_resonance_is_reported() {
    // resonances of the double barrier are far narrower than this grid
    let spec = presets::gaussian('c').unwrap();
    let s = PhysicalScales::new(1.0, 0.1).unwrap();
    let grid: Vec<f64> = (0..=40).map(|i| 0.3 + 0.02 * i as f64).collect();
    assert!(matches!(
        phase_curve(&spec, &s, &grid),
        Err(tunnelcld::Error::UnwrapAmbiguity { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitarity_and_reciprocity(
        coeffs in prop::collection::vec(-1.5f64..1.5, 1..5),
        e in 0.05f64..3.0,
        hbar in 0.1f64..1.0,
    ) {
        prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
        let spec = PotentialSpec::gaussian_polynomial(coeffs, 1.0).unwrap();
        let s = PhysicalScales::new(1.0, hbar).unwrap();
        let a = amplitudes(&spec, &s, C::new(e, 0.0)).unwrap();
        prop_assert!((a.alpha.norm_sqr() + a.beta.norm_sqr() - 1.0).abs() < 1e-8);
        prop_assert!((a.beta - a.beta_reverse).norm() < 1e-8);
    }
}
