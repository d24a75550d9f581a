//! Classical traversal times, the smoothed continuum level density built
//! from them, phase reconstruction and the local singularity analysis at
//! stationary points of the potential.
//!
//! Sign convention: with `beta = e^{i Phi}` and `Delta rho = Phi'/pi`, the
//! imaginary part of the density is `-(1/pi) d ln|beta|/dE`, so forbidden
//! traversal time enters with a negative sign:
//! `pi hbar Delta rho = (t+ - Theta(E) t0) - i (t- - Theta(-E) t0)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::potential::{
    find_stationary_points, InteractionBounds, PhysicalScales, PotentialSpec, StationaryKind,
    StationaryPoint,
};
use crate::quadrature::integrate_adaptive;

type C = Complex64;

/// Minimum distance of an energy from any stationary energy.
pub const SINGULAR_GUARD: f64 = 1e-10;
const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalTimes {
    pub energy: f64,
    /// Time spent where `E >= V`.
    pub t_plus: f64,
    /// Imaginary-time duration where `E < V`.
    pub t_minus: f64,
    /// Free traversal time `sqrt(m / 2|E|) (b - a)`.
    pub t_zero: f64,
}

/// Energies at which traversal times diverge or jump: stationary values of
/// V inside `[a, b]` (or the barrier top for the square barrier).
pub fn singular_energies(spec: &PotentialSpec, bounds: &InteractionBounds) -> Result<Vec<f64>> {
    match spec {
        PotentialSpec::Zero => Ok(Vec::new()),
        PotentialSpec::Rectangular { v0, .. } => Ok(vec![*v0]),
        PotentialSpec::GaussianPolynomial { .. } => Ok(find_stationary_points(spec, (bounds.a, bounds.b))?
            .into_iter()
            .map(|p| p.e0)
            .collect()),
    }
}

fn check_regular(energy: f64, singular: &[f64], guard: f64) -> Result<()> {
    if energy.abs() <= guard {
        return Err(Error::SingularEnergy { energy, singular: 0.0 });
    }
    if let Some(&s) = singular.iter().find(|&&s| (energy - s).abs() <= guard) {
        return Err(Error::SingularEnergy { energy, singular: s });
    }
    Ok(())
}

/// Roots of `E - V(x)` inside `(a, b)`, left to right. V is monotone between
/// consecutive stationary points, so each such segment holds at most one root.
pub fn turning_points(spec: &PotentialSpec, bounds: &InteractionBounds, energy: f64) -> Result<Vec<f64>> {
    match spec {
        PotentialSpec::Zero => Ok(Vec::new()),
        PotentialSpec::Rectangular { v0, half_width } => {
            if (energy > 0.0) != (energy > *v0) {
                Ok(vec![-half_width, *half_width])
            } else {
                Ok(Vec::new())
            }
        }
        PotentialSpec::GaussianPolynomial { .. } => {
            let mut knots = vec![bounds.a];
            knots.extend(
                find_stationary_points(spec, (bounds.a, bounds.b))?
                    .into_iter()
                    .map(|p| p.x0)
                    .filter(|&x| x > bounds.a && x < bounds.b),
            );
            knots.push(bounds.b);
            let g = |x: f64| energy - spec.value(x);
            let mut roots = Vec::new();
            for w in knots.windows(2) {
                let (mut lo, mut hi) = (w[0], w[1]);
                let (glo, ghi) = (g(lo), g(hi));
                if glo == 0.0 && lo > bounds.a {
                    continue;
                }
                if glo.signum() == ghi.signum() || ghi == 0.0 {
                    if ghi == 0.0 && hi < bounds.b {
                        roots.push(hi);
                    }
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(mid).signum() == glo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            Ok(roots)
        }
    }
}

/// `int dx / sqrt|E - V|` over `[u, v]` after `x = c + d sin(phi)`, which
/// removes inverse square-root endpoint singularities. Near a turning-point
/// endpoint the gap is taken as `V(x_T) - V(x)` so it keeps full relative
/// precision.
fn segment_integral(
    spec: &PotentialSpec,
    energy: f64,
    (u, u_turning): (f64, bool),
    (v, v_turning): (f64, bool),
) -> Result<f64> {
    let c = 0.5 * (u + v);
    let d = 0.5 * (v - u);
    let f = |phi: f64| {
        let x = c + d * phi.sin();
        let gap = if phi < 0.0 && u_turning {
            spec.difference(u, x)
        } else if phi >= 0.0 && v_turning {
            spec.difference(v, x)
        } else {
            energy - spec.value(x)
        }
        .abs();
        if gap == 0.0 {
            0.0
        } else {
            d * phi.cos() / gap.sqrt()
        }
    };
    let rough = integrate_adaptive(f, -FRAC_PI_2, FRAC_PI_2, 1e-6 * (v - u))?;
    integrate_adaptive(f, -FRAC_PI_2, FRAC_PI_2, RELATIVE_TOLERANCE * rough.abs().max(1e-300))
}

/// Allowed and forbidden traversal times across `[a, b]`.
pub fn classical_times(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    bounds: &InteractionBounds,
    energy: f64,
) -> Result<ClassicalTimes> {
    if !(bounds.b > bounds.a) {
        return Err(Error::Precondition("interaction interval is empty".into()));
    }
    check_regular(energy, &singular_energies(spec, bounds)?, SINGULAR_GUARD)?;
    let pref = (scales.mass / 2.0).sqrt();
    let t_zero = pref * bounds.width() / energy.abs().sqrt();
    let (mut t_plus, mut t_minus) = (0.0, 0.0);
    match spec {
        PotentialSpec::Zero => {
            if energy > 0.0 {
                t_plus = t_zero;
            } else {
                t_minus = t_zero;
            }
        }
        PotentialSpec::Rectangular { v0, half_width } => {
            let inner = 2.0 * half_width.min(0.5 * bounds.width());
            let outer = bounds.width() - inner;
            for (length, v) in [(outer, 0.0), (inner, *v0)] {
                let t = pref * length / (energy - v).abs().sqrt();
                if energy > v {
                    t_plus += t;
                } else {
                    t_minus += t;
                }
            }
        }
        PotentialSpec::GaussianPolynomial { .. } => {
            let mut edges = vec![(bounds.a, false)];
            edges.extend(turning_points(spec, bounds, energy)?.into_iter().map(|x| (x, true)));
            edges.push((bounds.b, false));
            for w in edges.windows(2) {
                let (u, v) = (w[0].0, w[1].0);
                if v <= u {
                    continue;
                }
                let t = pref * segment_integral(spec, energy, w[0], w[1])?;
                if energy > spec.value(0.5 * (u + v)) {
                    t_plus += t;
                } else {
                    t_minus += t;
                }
            }
        }
    }
    Ok(ClassicalTimes {
        energy,
        t_plus,
        t_minus,
        t_zero,
    })
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Complex time shift `pi hbar Delta rho_bar` from traversal times.
pub fn complex_time_shift(times: &ClassicalTimes) -> C {
    let e = times.energy;
    C::new(
        times.t_plus - heaviside(e) * times.t_zero,
        -(times.t_minus - heaviside(-e) * times.t_zero),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothedDensityPoint {
    pub energy: f64,
    pub value: C,
    pub times: ClassicalTimes,
}

impl SmoothedDensityPoint {
    pub fn from_times(times: ClassicalTimes, scales: &PhysicalScales) -> Self {
        SmoothedDensityPoint {
            energy: times.energy,
            value: complex_time_shift(&times) / (PI * scales.hbar),
            times,
        }
    }
}

/// Smoothed density on a grid that stays `1e-6` away from 0 and from every
/// stationary energy.
pub fn smoothed_cld(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    bounds: &InteractionBounds,
    grid: &[f64],
) -> Result<Vec<SmoothedDensityPoint>> {
    let singular = singular_energies(spec, bounds)?;
    for &e in grid {
        check_regular(e, &singular, 1e-6)?;
    }
    grid.par_iter()
        .map(|&e| Ok(SmoothedDensityPoint::from_times(classical_times(spec, scales, bounds, e)?, scales)))
        .collect()
}

/// Complex time shift `pi hbar Delta rho` for any density value.
pub fn eisenbud_wigner(density: C, scales: &PhysicalScales) -> C {
    PI * scales.hbar * density
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReconstruction {
    pub energies: Vec<f64>,
    pub phase: Vec<C>,
    /// Richardson estimate of the trapezoid error at the top of the grid.
    pub error_estimate: f64,
}

/// `Phi(E) = pi int Delta rho dE` by the trapezoid rule. The additive
/// constant makes `Re Phi(0) = 0` when the grid straddles zero; otherwise
/// `Re Phi` vanishes at the first grid point.
pub fn reconstruct_phase(grid: &[f64], densities: &[C]) -> Result<PhaseReconstruction> {
    if grid.len() != densities.len() || grid.len() < 3 {
        return Err(Error::Precondition(
            "phase reconstruction needs matching grids of at least 3 points".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("energy grid must be strictly increasing".into()));
    }
    let mut phase = vec![C::new(0.0, 0.0); grid.len()];
    for j in 1..grid.len() {
        phase[j] = phase[j - 1] + 0.5 * PI * (densities[j] + densities[j - 1]) * (grid[j] - grid[j - 1]);
    }
    // coarse trapezoid on every other point for the Richardson estimate
    let mut coarse = C::new(0.0, 0.0);
    let mut j = 0;
    while j + 2 < grid.len() {
        coarse += 0.5 * PI * (densities[j + 2] + densities[j]) * (grid[j + 2] - grid[j]);
        j += 2;
    }
    let fine_part = phase[j] - phase[0];
    let error_estimate = (fine_part - coarse).norm() / 3.0;

    let shift = match grid.iter().position(|&e| e >= 0.0) {
        Some(k) if k > 0 => {
            let t = (0.0 - grid[k - 1]) / (grid[k] - grid[k - 1]);
            phase[k - 1].re + t * (phase[k].re - phase[k - 1].re)
        }
        _ => 0.0,
    };
    phase.iter_mut().for_each(|p| p.re -= shift);
    Ok(PhaseReconstruction {
        energies: grid.to_vec(),
        phase,
        error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    AllowedNormal,
    ForbiddenInverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
}

/// Leading irregular behaviour of a traversal time near `E0`, up to factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SingularForm {
    /// `Theta(E - E0)`.
    StepUp,
    /// `Theta(E0 - E)`.
    StepDown,
    LogDivergence,
    /// `|E - E0|^exponent` on both sides.
    PowerDivergence { exponent: f64 },
    /// `|E - E0|^exponent` on one side only.
    PowerOneSided { exponent: f64, side: Side },
}

impl SingularForm {
    pub fn label(&self) -> String {
        match self {
            SingularForm::StepUp => "step_up".into(),
            SingularForm::StepDown => "step_down".into(),
            SingularForm::LogDivergence => "log_divergence".into(),
            SingularForm::PowerDivergence { exponent } => format!("power_divergence({exponent})"),
            SingularForm::PowerOneSided { exponent, side } => format!(
                "power_one_sided({exponent},{})",
                match side {
                    Side::Above => "above",
                    Side::Below => "below",
                }
            ),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            SingularForm::PowerDivergence { exponent } | SingularForm::PowerOneSided { exponent, .. } => {
                Some(*exponent)
            }
            _ => None,
        }
    }
}

/// Predicted singular forms of `t+` (real part) and `t-` (imaginary part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityPrediction {
    pub x0: f64,
    pub e0: f64,
    /// `None` for the square-barrier limit `n -> infinity`.
    pub order: Option<u32>,
    pub kind: StationaryKind,
    pub region: Region,
    pub re_form: SingularForm,
    pub im_form: SingularForm,
}

pub fn power_exponent(order: u32) -> f64 {
    -((order as f64) - 2.0) / (2.0 * order as f64)
}

pub fn predict_singularity(point: &StationaryPoint) -> SingularityPrediction {
    let n = point.order;
    let p = power_exponent(n);
    let (region, re_form, im_form) = match (point.kind, n) {
        (StationaryKind::Minimum, 2) => (Region::AllowedNormal, SingularForm::StepUp, SingularForm::LogDivergence),
        (StationaryKind::Maximum, 2) => {
            (Region::ForbiddenInverted, SingularForm::LogDivergence, SingularForm::StepDown)
        }
        (StationaryKind::Minimum, _) => (
            Region::AllowedNormal,
            SingularForm::PowerOneSided { exponent: p, side: Side::Above },
            SingularForm::PowerDivergence { exponent: p },
        ),
        (StationaryKind::Maximum, _) => (
            Region::ForbiddenInverted,
            SingularForm::PowerDivergence { exponent: p },
            SingularForm::PowerOneSided { exponent: p, side: Side::Below },
        ),
        (StationaryKind::Saddle, _) => (
            Region::AllowedNormal,
            SingularForm::PowerDivergence { exponent: p },
            SingularForm::PowerDivergence { exponent: p },
        ),
    };
    SingularityPrediction {
        x0: point.x0,
        e0: point.e0,
        order: Some(n),
        kind: point.kind,
        region,
        re_form,
        im_form,
    }
}

/// Square-barrier limit at the barrier top.
pub fn predict_rectangular(v0: f64) -> SingularityPrediction {
    let (kind, region) = if v0 >= 0.0 {
        (StationaryKind::Maximum, Region::ForbiddenInverted)
    } else {
        (StationaryKind::Minimum, Region::AllowedNormal)
    };
    SingularityPrediction {
        x0: 0.0,
        e0: v0,
        order: None,
        kind,
        region,
        re_form: SingularForm::PowerOneSided { exponent: -0.5, side: Side::Above },
        im_form: SingularForm::PowerOneSided { exponent: -0.5, side: Side::Below },
    }
}

/// Fit of one traversal time near `E0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormFit {
    pub form: SingularForm,
    /// Fitted exponents below and above `E0` (power forms; `None` on a side
    /// that is not fitted).
    pub exponent_below: Option<f64>,
    pub exponent_above: Option<f64>,
    /// Coefficient of `-ln|dE|` per side (log form).
    pub log_coefficient_below: Option<f64>,
    pub log_coefficient_above: Option<f64>,
    /// Limit above minus limit below (step forms).
    pub step: Option<f64>,
    /// Largest relative RMS residual of the per-side fits.
    pub residual: f64,
    pub pass: bool,
}

/// Relative tolerance on fitted exponents and log coefficients.
pub const FIT_TOLERANCE: f64 = 0.05;

/// Least squares for a handful of basis columns (normal equations on
/// column-normalized data).
fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = columns.len();
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = columns[i].iter().zip(&columns[j]).map(|(x, z)| x * z).sum::<f64>() / (norms[i] * norms[j]);
        }
        a[i][k] = columns[i].iter().zip(y).map(|(x, z)| x * z).sum::<f64>() / norms[i];
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-14 {
            return None;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coeffs: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i] / norms[i]).collect();
    let rss: f64 = y
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let model: f64 = (0..k).map(|i| coeffs[i] * columns[i][n]).sum();
            (v - model).powi(2)
        })
        .sum();
    Some((coeffs, (rss / y.len() as f64).sqrt()))
}

fn spread(y: &[f64]) -> f64 {
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min).abs().max(1e-300)
}

/// `y = A |d|^p + B + C |d|`, minimized over `p` by scan and golden section.
fn fit_power(d: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let residual = |p: f64| -> f64 {
        let cols = vec![
            d.iter().map(|x| x.powf(p)).collect(),
            vec![1.0; d.len()],
            d.to_vec(),
        ];
        least_squares(&cols, y).map(|r| r.1).unwrap_or(f64::INFINITY)
    };
    let (lo, hi) = (-0.99, -0.005);
    let scan = 200;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=scan {
        let p = lo + (hi - lo) * i as f64 / scan as f64;
        let r = residual(p);
        if r < best.1 {
            best = (p, r);
        }
    }
    let width = (hi - lo) / scan as f64;
    let (mut a, mut b) = ((best.0 - width).max(lo), (best.0 + width).min(hi));
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - golden * (b - a);
        let e = a + golden * (b - a);
        if residual(c) < residual(e) {
            b = e;
        } else {
            a = c;
        }
    }
    let p = 0.5 * (a + b);
    let r = residual(p);
    if !r.is_finite() {
        return Err(Error::FitUnreliable("power-law least squares is singular".into()));
    }
    Ok((p, r / spread(y)))
}

/// `y = A ln|d| + B + C |d|`; returns `(-A, relative residual)`.
fn fit_log(d: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let cols = vec![d.iter().map(|x| x.ln()).collect(), vec![1.0; d.len()], d.to_vec()];
    let (c, r) = least_squares(&cols, y)
        .ok_or_else(|| Error::FitUnreliable("logarithmic least squares is singular".into()))?;
    Ok((-c[0], r / spread(y)))
}

/// `y = B + C |d| + D d^2`; returns the limit `B` and the relative residual.
fn fit_limit(d: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let cols = vec![vec![1.0; d.len()], d.to_vec(), d.iter().map(|x| x * x).collect()];
    let (c, r) = least_squares(&cols, y)
        .ok_or_else(|| Error::FitUnreliable("limit least squares is singular".into()))?;
    Ok((c[0], r / spread(y)))
}

/// Fit samples `(E, value)` near `e0` against the predicted form.
pub fn fit_form(form: SingularForm, e0: f64, samples: &[(f64, f64)]) -> Result<FormFit> {
    let split = |above: bool| -> (Vec<f64>, Vec<f64>) {
        samples
            .iter()
            .filter(|(e, _)| (*e > e0) == above && *e != e0)
            .map(|(e, v)| ((e - e0).abs(), *v))
            .unzip()
    };
    let (db, yb) = split(false);
    let (da, ya) = split(true);
    let range_ok = |d: &[f64]| {
        d.len() >= 6 && {
            let max = d.iter().cloned().fold(0.0, f64::max);
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            max / min >= 10.0
        }
    };
    let mut fit = FormFit {
        form,
        exponent_below: None,
        exponent_above: None,
        log_coefficient_below: None,
        log_coefficient_above: None,
        step: None,
        residual: 0.0,
        pass: false,
    };
    let need = |below: bool, above: bool| -> Result<()> {
        if (below && !range_ok(&db)) || (above && !range_ok(&da)) {
            return Err(Error::FitUnreliable(
                "need at least 6 samples per side spanning a decade in |E - E0|".into(),
            ));
        }
        Ok(())
    };
    let within = |got: f64, want: f64| (got - want).abs() <= FIT_TOLERANCE * want.abs();
    match form {
        SingularForm::PowerDivergence { exponent } | SingularForm::PowerOneSided { exponent, .. } => {
            let (below, above) = match form {
                SingularForm::PowerOneSided { side: Side::Above, .. } => (false, true),
                SingularForm::PowerOneSided { side: Side::Below, .. } => (true, false),
                _ => (true, true),
            };
            need(below, above)?;
            let mut pass = true;
            if below {
                let (p, r) = fit_power(&db, &yb)?;
                fit.exponent_below = Some(p);
                fit.residual = fit.residual.max(r);
                pass &= within(p, exponent);
            }
            if above {
                let (p, r) = fit_power(&da, &ya)?;
                fit.exponent_above = Some(p);
                fit.residual = fit.residual.max(r);
                pass &= within(p, exponent);
            }
            fit.pass = pass;
        }
        SingularForm::LogDivergence => {
            need(true, true)?;
            let (cb, rb) = fit_log(&db, &yb)?;
            let (ca, ra) = fit_log(&da, &ya)?;
            fit.log_coefficient_below = Some(cb);
            fit.log_coefficient_above = Some(ca);
            fit.residual = rb.max(ra);
            fit.pass = cb > 0.0 && ca > 0.0 && within(cb, ca) && fit.residual < 1e-3;
        }
        SingularForm::StepUp | SingularForm::StepDown => {
            need(true, true)?;
            let (lb, rb) = fit_limit(&db, &yb)?;
            let (la, ra) = fit_limit(&da, &ya)?;
            let step = la - lb;
            fit.step = Some(step);
            fit.residual = rb.max(ra);
            let sign_ok = match form {
                SingularForm::StepUp => step > 0.0,
                _ => step < 0.0,
            };
            fit.pass = sign_ok && fit.residual < 1e-3;
        }
    }
    Ok(fit)
}

/// Offsets `|E - E0|` used for singularity fits: geometric in `[1e-4, 1e-2]`.
pub fn fit_offsets(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityFit {
    pub prediction: SingularityPrediction,
    pub re: FormFit,
    pub im: FormFit,
}

impl SingularityFit {
    pub fn pass(&self) -> bool {
        self.re.pass && self.im.pass
    }
}

/// Sample `t+` and `t-` on both sides of the predicted singular energy and
/// fit them against the predicted forms.
pub fn fit_singularity(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    bounds: &InteractionBounds,
    prediction: &SingularityPrediction,
) -> Result<SingularityFit> {
    let energies: Vec<f64> = fit_offsets(21)
        .into_iter()
        .flat_map(|d| [prediction.e0 - d, prediction.e0 + d])
        .collect();
    let times = energies
        .par_iter()
        .map(|&e| classical_times(spec, scales, bounds, e))
        .collect::<Result<Vec<_>>>()?;
    let plus: Vec<(f64, f64)> = times.iter().map(|t| (t.energy, t.t_plus)).collect();
    let minus: Vec<(f64, f64)> = times.iter().map(|t| (t.energy, t.t_minus)).collect();
    Ok(SingularityFit {
        prediction: *prediction,
        re: fit_form(prediction.re_form, prediction.e0, &plus)?,
        im: fit_form(prediction.im_form, prediction.e0, &minus)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{interaction_bounds, presets, DEFAULT_BOUNDS_TOLERANCE};
    use approx::assert_relative_eq;

    fn unit() -> PhysicalScales {
        PhysicalScales::new(1.0, 1.0).unwrap()
    }

    fn bounds_of(spec: &PotentialSpec) -> InteractionBounds {
        interaction_bounds(spec, DEFAULT_BOUNDS_TOLERANCE).unwrap()
    }

    #[test]
    fn free_motion_times() {
        let b = InteractionBounds::new(-5.0, 5.0).unwrap();
        let t = classical_times(&PotentialSpec::Zero, &unit(), &b, 1.0).unwrap();
        assert_relative_eq!(t.t_plus, 0.5f64.sqrt() * 10.0, epsilon = 1e-14);
        assert_eq!(t.t_plus, t.t_zero);
        assert_eq!(t.t_minus, 0.0);
        assert_eq!(complex_time_shift(&t), C::new(0.0, 0.0));
    }

    #[test]
    fn square_barrier_tunneling_time() {
        let spec = presets::square_barrier();
        let t = classical_times(&spec, &unit(), &bounds_of(&spec), 0.5).unwrap();
        assert_eq!(t.t_plus, 0.0);
        assert_relative_eq!(t.t_minus, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn parabolic_barrier_matches_closed_form() {
        // V = 1 - x^2 on the whole line is not decaying, so compare the
        // forbidden time of exp(-x^2) against its own direct quadrature
        let spec = presets::gaussian('a').unwrap();
        let b = bounds_of(&spec);
        let e = 0.3;
        let xt = (1.0f64 / e).ln().sqrt();
        let t = classical_times(&spec, &unit(), &b, e).unwrap();
        // midpoint rule on the substituted integrand x = xt sin(phi)
        let n = 200_000;
        let h = PI / n as f64;
        let direct: f64 = (0..n)
            .map(|i| {
                let phi = -FRAC_PI_2 + (i as f64 + 0.5) * h;
                let x = xt * phi.sin();
                xt * phi.cos() / ((-x * x).exp() - e).sqrt() * h
            })
            .sum::<f64>()
            * 0.5f64.sqrt();
        assert_relative_eq!(t.t_minus, direct, max_relative = 1e-8);
    }

    #[test]
    fn stationary_energy_is_rejected() {
        let spec = presets::gaussian('a').unwrap();
        let err = classical_times(&spec, &unit(), &bounds_of(&spec), 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularEnergy { .. }));
        assert!(classical_times(&spec, &unit(), &bounds_of(&spec), 0.0).is_err());
    }

    #[test]
    fn inversion_duality() {
        let spec = presets::gaussian('d').unwrap();
        let b = bounds_of(&spec);
        for e in [0.3, 0.5, 0.7, 0.9] {
            let direct = classical_times(&spec, &unit(), &b, e).unwrap();
            let inverted = classical_times(&spec.negated(), &unit(), &b, -e).unwrap();
            assert_relative_eq!(direct.t_minus, inverted.t_plus, max_relative = 1e-9);
            assert_relative_eq!(direct.t_plus, inverted.t_minus, max_relative = 1e-9);
        }
    }

    #[test]
    fn negative_energy_inside_well() {
        let spec = presets::gaussian('f').unwrap();
        let p = smoothed_cld(&spec, &unit(), &bounds_of(&spec), &[-0.1]).unwrap();
        assert!(p[0].times.t_plus > 0.0);
        assert!(p[0].value.re > 0.0);
        // exactly one part carries the free-time subtraction
        let t = p[0].times;
        assert_relative_eq!(p[0].value.im * PI, -(t.t_minus - t.t_zero), epsilon = 1e-12);
        assert_relative_eq!(p[0].value.re * PI, t.t_plus, epsilon = 1e-12);
    }

    #[test]
    fn time_shift_of_zero_density() {
        assert_eq!(eisenbud_wigner(C::new(0.0, 0.0), &unit()), C::new(0.0, 0.0));
        let s = PhysicalScales::new(1.0, 0.5).unwrap();
        assert_relative_eq!(eisenbud_wigner(C::new(2.0, 0.0), &s).re, PI, epsilon = 1e-15);
    }

    #[test]
    fn phase_of_zero_density_is_zero() {
        let grid: Vec<f64> = (0..11).map(|i| -0.5 + 0.1 * i as f64).collect();
        let r = reconstruct_phase(&grid, &vec![C::new(0.0, 0.0); 11]).unwrap();
        assert!(r.phase.iter().all(|p| p.norm() == 0.0));
    }

    #[test]
    fn phase_anchor_at_zero() {
        let grid: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let dens = vec![C::new(1.0 / PI, 0.5); 21];
        let r = reconstruct_phase(&grid, &dens).unwrap();
        // Re Phi = E exactly for a constant 1/pi density
        for (e, p) in grid.iter().zip(&r.phase) {
            assert_relative_eq!(p.re, *e, epsilon = 1e-12);
        }
        assert!(r.error_estimate < 1e-12);
    }

    #[test]
    fn table_rows() {
        let a = find_stationary_points(&presets::gaussian('a').unwrap(), (-8.0, 8.0)).unwrap()[0];
        let pa = predict_singularity(&a);
        assert_eq!(pa.re_form, SingularForm::LogDivergence);
        assert_eq!(pa.im_form, SingularForm::StepDown);
        let b = find_stationary_points(&presets::gaussian('b').unwrap(), (-8.0, 8.0)).unwrap()[0];
        let pb = predict_singularity(&b);
        assert_eq!(pb.re_form, SingularForm::PowerDivergence { exponent: -0.25 });
        assert_eq!(pb.im_form, SingularForm::PowerOneSided { exponent: -0.25, side: Side::Below });
        let r = predict_rectangular(1.0);
        assert_eq!(r.re_form, SingularForm::PowerOneSided { exponent: -0.5, side: Side::Above });
        assert_eq!(r.im_form, SingularForm::PowerOneSided { exponent: -0.5, side: Side::Below });
        assert_relative_eq!(power_exponent(6), -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn synthetic_power_law_fit() {
        let e0 = 1.0;
        let samples: Vec<(f64, f64)> = fit_offsets(21)
            .into_iter()
            .flat_map(|d| [(e0 - d, 3.0 * d.powf(-0.3) + 2.0 - d), (e0 + d, 1.5 * d.powf(-0.3) + 0.5)])
            .collect();
        let fit = fit_form(SingularForm::PowerDivergence { exponent: -0.3 }, e0, &samples).unwrap();
        assert!((fit.exponent_below.unwrap() + 0.3).abs() < 1e-6);
        assert!((fit.exponent_above.unwrap() + 0.3).abs() < 1e-6);
        assert!(fit.pass);
    }

    #[test]
    fn fit_needs_dynamic_range() {
        let samples: Vec<(f64, f64)> = (1..8).map(|i| (1.0 + 1e-3 * (1.0 + 0.01 * i as f64), 1.0)).collect();
        assert!(matches!(
            fit_form(SingularForm::PowerOneSided { exponent: -0.5, side: Side::Above }, 1.0, &samples),
            Err(Error::FitUnreliable(_))
        ));
    }
}
