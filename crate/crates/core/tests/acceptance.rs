//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use tunnelcld::instanton::{accumulated_times, conservation_report, integrate};
use tunnelcld::potential::{
    find_stationary_points, interaction_bounds, presets, PhysicalScales, StationaryKind,
    DEFAULT_BOUNDS_TOLERANCE,
};
use tunnelcld::scaling::{
    cld_at, cld_real_axis, contour_count, count_poles, spectral_set, ComplexScalingConfig, EnergyRectangle,
    DEFAULT_MARGIN,
};
use tunnelcld::scattering::{amplitudes, oracle_density};
use tunnelcld::semiclassics::{
    classical_times, fit_singularity, predict_singularity, singular_energies, smoothed_cld, SingularForm,
};

type C = Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Square barrier: spectral density against the scattering-phase oracle.
fn a1() -> Outcome {
    let spec = presets::square_barrier();
    let scales = PhysicalScales::new(1.0, 0.6).unwrap();
    let config = ComplexScalingConfig::new(0.3, 100.0, 1200).with_exterior(6.0, 16.0);
    let set = spectral_set(&spec, &scales, &config, DEFAULT_MARGIN).unwrap();
    let grid = linspace(0.2, 2.0, 50);
    let eps = 0.01;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut worst_axis: f64 = 0.0;
    let mut scale_axis: f64 = 0.0;
    for &e in &grid {
        // like-for-like: both sides at E + i eps
        let oracle = oracle_density(&spec, &scales, C::new(e, eps)).unwrap();
        let spectral = cld_at(C::new(e, eps), &set).unwrap();
        worst = worst.max((oracle - spectral).norm());
        scale = scale.max(oracle.norm());
        // and on the real axis itself
        let oracle0 = oracle_density(&spec, &scales, C::new(e, 0.0)).unwrap();
        let spectral0 = cld_at(C::new(e, 0.0), &set).unwrap();
        worst_axis = worst_axis.max((oracle0 - spectral0).norm());
        scale_axis = scale_axis.max(oracle0.norm());
    }
    let (rel, rel_axis) = (worst / scale, worst_axis / scale_axis);
    Outcome {
        pass: rel < 0.02 && rel_axis < 0.02,
        detail: format!(
            "max deviation / max |oracle| = {rel:.2e} at E + 0.01i, {rel_axis:.2e} on the axis (tol 2e-2)"
        ),
    }
}

/// Unitarity for the gallery potentials and reciprocity for the asymmetric ones.
fn a2() -> Outcome {
    let scales = PhysicalScales::new(1.0, 0.1).unwrap();
    let grid = linspace(0.05, 2.5, 100);
    let (mut unit, mut recip): (f64, f64) = (0.0, 0.0);
    for panel in presets::PANELS {
        let spec = presets::gaussian(panel).unwrap();
        for &e in &grid {
            let a = amplitudes(&spec, &scales, C::new(e, 0.0)).unwrap();
            unit = unit.max((a.alpha.norm_sqr() + a.beta.norm_sqr() - 1.0).abs());
            if panel == 'd' || panel == 'f' {
                recip = recip.max((a.beta - a.beta_reverse).norm());
            }
        }
    }
    Outcome {
        pass: unit < 1e-8 && recip < 1e-8,
        detail: format!("max unitarity defect {unit:.2e}, max reciprocity defect {recip:.2e} (tol 1e-8)"),
    }
}

/// Rotation-angle independence of the real-axis density.
fn a3() -> Outcome {
    let spec = presets::gaussian('f').unwrap();
    let scales = PhysicalScales::from_kappa(1.0, 20.0).unwrap();
    let grid = linspace(0.2, 1.5, 131);
    let density = |theta: f64| {
        let config = ComplexScalingConfig::new(theta, 20.0, 1600);
        let set = spectral_set(&spec, &scales, &config, DEFAULT_MARGIN).unwrap();
        cld_real_axis(&set, &grid, 0.0).unwrap().values
    };
    let (d1, d2) = (density(0.1), density(0.2));
    let worst = d1.iter().zip(&d2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Outcome {
        pass: worst < 1e-3,
        detail: format!("max |rho(0.1) - rho(0.2)| = {worst:.2e} (tol 1e-3)"),
    }
}

/// Contour integrals count twice the enclosed resonances.
fn a4() -> Outcome {
    let spec = presets::gaussian('c').unwrap();
    let scales = PhysicalScales::from_kappa(1.0, 10.0).unwrap();
    let config = ComplexScalingConfig::new(0.3, 20.0, 1200);
    let set = spectral_set(&spec, &scales, &config, DEFAULT_MARGIN).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (lo, hi, expected) in [(0.6, 0.7, 0usize), (0.7, 0.8, 1), (0.55, 0.8, 2)] {
        let rect = EnergyRectangle {
            e_min: lo,
            e_max: hi,
            gamma_min: -0.01,
            gamma_max: 0.02,
        };
        let value = contour_count(&set, &rect, 400).unwrap();
        let (full, free) = count_poles(&set, &rect);
        let target = 2.0 * expected as f64;
        pass &= (value - C::new(target, 0.0)).norm() < 1e-3 && full - free == expected;
        parts.push(format!("[{lo},{hi}] -> {:.6} (poles {full}-{free})", value.re));
    }
    Outcome {
        pass,
        detail: format!("{} (tol 1e-3)", parts.join(", ")),
    }
}

/// Trajectory times against quadrature, with energy conservation per segment.
fn a5() -> Outcome {
    let spec = presets::gaussian('e').unwrap();
    let scales = PhysicalScales::new(1.0, 1.0).unwrap();
    let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
    let (mut dev, mut drift): (f64, f64) = (0.0, 0.0);
    for e in [0.3, 0.5, 0.7] {
        let record = integrate(&spec, &scales, &bounds, e, bounds.a, 1e4, bounds.width() / 20_000.0).unwrap();
        let (tp, tm) = accumulated_times(&record).unwrap();
        let t = classical_times(&spec, &scales, &bounds, e).unwrap();
        dev = dev.max((tp - t.t_plus).abs()).max((tm - t.t_minus).abs());
        for seg in conservation_report(&spec, &scales, &record) {
            drift = drift.max(seg.max_drift);
        }
    }
    Outcome {
        pass: dev < 1e-6 && drift < 1e-8,
        detail: format!("max time deviation {dev:.2e} (tol 1e-6), max segment drift {drift:.2e} (tol 1e-8)"),
    }
}

/// Singular forms at stationary points.
fn a6() -> Outcome {
    let scales = PhysicalScales::new(1.0, 1.0).unwrap();
    let fit_at = |panel: char| {
        let spec = presets::gaussian(panel).unwrap();
        let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        find_stationary_points(&spec, (bounds.a, bounds.b))
            .unwrap()
            .into_iter()
            .map(|p| (p, fit_singularity(&spec, &scales, &bounds, &predict_singularity(&p)).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = fit_at('a');
    let a_ok = a.len() == 1
        && a[0].1.re.form == SingularForm::LogDivergence
        && a[0].1.im.form == SingularForm::StepDown
        && a[0].1.pass();
    let b = fit_at('b');
    let b_fit = &b[0].1;
    let exps: Vec<f64> = [b_fit.re.exponent_below, b_fit.re.exponent_above, b_fit.im.exponent_below]
        .into_iter()
        .flatten()
        .collect();
    let b_ok = b.len() == 1 && exps.len() == 3 && exps.iter().all(|p| (p + 0.25).abs() <= 0.05 * 0.25);
    let mut step_err: f64 = 0.0;
    let mut minima = 0;
    for panel in ['c', 'd', 'e', 'f'] {
        for (p, fit) in fit_at(panel) {
            if p.kind == StationaryKind::Minimum && p.order == 2 {
                let expected = PI * (scales.mass / (2.0 * p.leading_coeff)).sqrt();
                step_err = step_err.max((fit.re.step.unwrap() / expected - 1.0).abs());
                minima += 1;
            }
        }
    }
    Outcome {
        pass: a_ok && b_ok && minima > 0 && step_err < 0.01,
        detail: format!(
            "(a) log/step verdict {}, (b) exponents {:?} (target -0.25 +- 5%), {minima} minima step error {step_err:.2e} (tol 1e-2)",
            if a_ok { "ok" } else { "wrong" },
            exps.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    }
}

/// Quantum time shift against the smoothed semiclassical one.
fn a7() -> Outcome {
    let scales = PhysicalScales::from_kappa(1.0, 50.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for panel in ['a', 'd'] {
        let spec = presets::gaussian(panel).unwrap();
        let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE).unwrap();
        let singular = singular_energies(&spec, &bounds).unwrap();
        let grid: Vec<f64> = linspace(0.3, 1.5, 241)
            .into_iter()
            .filter(|e| e.abs() > 0.05 && singular.iter().all(|s| (e - s).abs() > 0.05))
            .collect();
        let config = ComplexScalingConfig::new(0.3, 16.0, 1200);
        let set = spectral_set(&spec, &scales, &config, DEFAULT_MARGIN).unwrap();
        let quantum = cld_real_axis(&set, &grid, 0.05).unwrap().values;
        let semi = smoothed_cld(&spec, &scales, &bounds, &grid).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (q, s) in quantum.iter().zip(&semi) {
            let (tq, ts) = (PI * scales.hbar * q, PI * scales.hbar * s.value);
            num += (tq - ts).norm_sqr();
            den += ts.norm_sqr();
        }
        let rel = (num / den).sqrt();
        pass &= rel < 0.15;
        parts.push(format!("({panel}) {rel:.4}"));
    }
    Outcome {
        pass,
        detail: format!("relative RMS {} (tol 0.15)", parts.join(", ")),
    }
}

/// Density at a narrow resonance equals twice its lifetime.
fn a8() -> Outcome {
    let spec = presets::gaussian('c').unwrap();
    let scales = PhysicalScales::from_kappa(1.0, 10.0).unwrap();
    let config = ComplexScalingConfig::new(0.3, 20.0, 1200);
    let set = spectral_set(&spec, &scales, &config, DEFAULT_MARGIN).unwrap();
    let all: Vec<_> = set.full_poles().collect();
    let mut worst: f64 = 0.0;
    let mut checked = Vec::new();
    for r in &set.resonances {
        let isolated = all
            .iter()
            .filter(|p| (**p - r.value()).norm() > 1e-12)
            .all(|p| (*p - r.value()).norm() > 20.0 * r.gamma);
        if r.gamma < 1e-2 && r.gamma > 0.0 && isolated {
            let d = cld_at(C::new(r.e, 0.0), &set).unwrap();
            let ratio = PI * scales.hbar * d.re / (2.0 * scales.hbar / r.gamma);
            worst = worst.max((ratio - 1.0).abs());
            checked.push(format!("{:.4}", r.e));
        }
    }
    Outcome {
        pass: !checked.is_empty() && worst < 0.05,
        detail: format!("resonances at E = [{}], max relative error {worst:.2e} (tol 5e-2)", checked.join(", ")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("A1", a1, Duration::from_secs(300)),
        ("A2", a2, Duration::from_secs(60)),
        ("A3", a3, Duration::from_secs(300)),
        ("A4", a4, Duration::from_secs(60)),
        ("A5", a5, Duration::from_secs(60)),
        ("A6", a6, Duration::from_secs(120)),
        ("A7", a7, Duration::from_secs(600)),
        ("A8", a8, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        if !pass {
            failures += 1;
        }
        println!(
            "{name} {}: {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
