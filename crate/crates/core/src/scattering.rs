//! Reflection and transmission amplitudes from a piecewise-constant slicing of
//! the potential, composed as scattering (Redheffer) matrices so that
//! evanescent slices never amplify.
//!
//! Conventions: for a wave `e^{ikx}` incident from the left the solution is
//! `e^{ikx} + alpha e^{-ikx}` to the left of the interaction region and
//! `beta e^{ikx}` to its right. The complex phase is defined by
//! `beta = e^{i Phi}`, so `Im Phi = -ln|beta|`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::potential::{interaction_bounds, InteractionBounds, PhysicalScales, PotentialSpec};
use crate::quadrature::{composite_nodes, legendre_rule};

type C = Complex64;

/// Relative tolerance of the outer interval on the potential tails.
const TAIL_TOLERANCE: f64 = 1e-14;
const INITIAL_SLICES: usize = 512;
const MAX_SLICES: usize = 1 << 20;
/// Convergence threshold between successive extrapolated refinements.
pub const REFINEMENT_TOLERANCE: f64 = 1e-9;
/// Energies closer than this to zero are rejected.
pub const ZERO_ENERGY_GUARD: f64 = 1e-9;

/// Amplitudes at a single energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub energy: f64,
    pub alpha: C,
    pub beta: C,
    /// Principal-branch phase unless produced by [`phase_curve`].
    pub phi: C,
}

impl ScatteringResult {
    fn from_amplitudes(energy: f64, alpha: C, beta: C) -> Self {
        ScatteringResult {
            energy,
            alpha,
            beta,
            phi: C::new(beta.arg(), -beta.norm().ln()),
        }
    }

    pub fn transmission_probability(&self) -> f64 {
        self.beta.norm_sqr()
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.alpha.norm_sqr() + self.beta.norm_sqr() - 1.0).abs()
    }
}

/// Amplitudes for incidence from both sides, possibly at complex energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub alpha: C,
    pub beta: C,
    /// Transmission amplitude for incidence from the right.
    pub beta_reverse: C,
    /// Slice count of the finer of the two extrapolated resolutions; zero
    /// for exact (rectangular or free) evaluations.
    pub slices: usize,
}

#[derive(Clone, Copy)]
struct SMatrix {
    r: C,
    t: C,
    rp: C,
    tp: C,
}

impl SMatrix {
    fn interface(q1: C, q2: C) -> Self {
        let s = q1 + q2;
        SMatrix {
            r: (q1 - q2) / s,
            t: 2.0 * q1 / s,
            rp: (q2 - q1) / s,
            tp: 2.0 * q2 / s,
        }
    }

    fn then(self, next: SMatrix) -> Self {
        let d = C::new(1.0, 0.0) - self.rp * next.r;
        SMatrix {
            t: self.t * next.t / d,
            r: self.r + self.tp * next.r * self.t / d,
            tp: self.tp * next.tp / d,
            rp: next.rp + next.t * self.rp * next.tp / d,
        }
    }

    fn propagate(self, q: C, h: f64) -> Self {
        let e = (C::i() * q * h).exp();
        SMatrix {
            r: self.r,
            t: self.t * e,
            rp: self.rp * e * e,
            tp: self.tp * e,
        }
    }
}

/// Local wavenumber `sqrt(2m(E - V))/hbar` on the branch with `Im q >= 0`.
fn wavenumber(scales: &PhysicalScales, energy: C, v: f64) -> C {
    let mut arg = C::new(energy.re - v, energy.im);
    if arg.im == 0.0 {
        arg.im = 0.0;
    }
    let q = (2.0 * scales.mass * arg).sqrt() / scales.hbar;
    if q.im < 0.0 {
        -q
    } else {
        q
    }
}

fn check_energy(energy: C) -> Result<()> {
    if !(energy.re.is_finite() && energy.im.is_finite()) || energy.im < 0.0 {
        return Err(Error::Precondition(format!(
            "energy must be finite with Im E >= 0, got {energy}"
        )));
    }
    if energy.norm() < ZERO_ENERGY_GUARD {
        return Err(Error::SingularEnergy {
            energy: energy.re,
            singular: 0.0,
        });
    }
    if energy.im == 0.0 && energy.re < 0.0 {
        return Err(Error::Precondition(format!(
            "scattering energy must be positive, got {}",
            energy.re
        )));
    }
    Ok(())
}

/// Slab-composed amplitudes for midpoint samples `vs` of width `h` on `[a, b]`.
fn compose(scales: &PhysicalScales, energy: C, a: f64, b: f64, vs: &[f64]) -> Amplitudes {
    let k = wavenumber(scales, energy, 0.0);
    let h = (b - a) / vs.len() as f64;
    let floor = 3e-7 * (k.norm() + 1.0);
    let nudge = |q: C| if q.norm() < floor { C::new(floor, floor) } else { q };
    let mut q_prev = nudge(wavenumber(scales, energy, vs[0]));
    let mut s = SMatrix::interface(k, q_prev).propagate(q_prev, h);
    for &v in &vs[1..] {
        let q = nudge(wavenumber(scales, energy, v));
        s = s.then(SMatrix::interface(q_prev, q)).propagate(q, h);
        q_prev = q;
    }
    s = s.then(SMatrix::interface(q_prev, k));
    let shift = (-C::i() * k * (b - a)).exp();
    Amplitudes {
        alpha: s.r * (2.0 * C::i() * k * a).exp(),
        beta: s.t * shift,
        beta_reverse: s.tp * shift,
        slices: vs.len(),
    }
}

fn sliced(spec: &PotentialSpec, scales: &PhysicalScales, energy: C, bounds: &InteractionBounds, n: usize) -> Amplitudes {
    let h = bounds.width() / n as f64;
    let vs: Vec<f64> = (0..n)
        .map(|i| spec.value(bounds.a + (i as f64 + 0.5) * h))
        .collect();
    compose(scales, energy, bounds.a, bounds.b, &vs)
}

/// Richardson combination of the resolutions `n` and `2n`.
fn extrapolated(spec: &PotentialSpec, scales: &PhysicalScales, energy: C, bounds: &InteractionBounds, n: usize) -> Amplitudes {
    let coarse = sliced(spec, scales, energy, bounds, n);
    let fine = sliced(spec, scales, energy, bounds, 2 * n);
    let rich = |c: C, f: C| (4.0 * f - c) / 3.0;
    Amplitudes {
        alpha: rich(coarse.alpha, fine.alpha),
        beta: rich(coarse.beta, fine.beta),
        beta_reverse: rich(coarse.beta_reverse, fine.beta_reverse),
        slices: 2 * n,
    }
}

fn free_amplitudes() -> Amplitudes {
    Amplitudes {
        alpha: C::new(0.0, 0.0),
        beta: C::new(1.0, 0.0),
        beta_reverse: C::new(1.0, 0.0),
        slices: 0,
    }
}

/// Amplitudes at a complex energy with `Im E >= 0`, refined until two
/// successive extrapolated resolutions agree.
pub fn amplitudes(spec: &PotentialSpec, scales: &PhysicalScales, energy: C) -> Result<Amplitudes> {
    check_energy(energy)?;
    match spec {
        PotentialSpec::Zero => return Ok(free_amplitudes()),
        PotentialSpec::Rectangular { v0, half_width } => {
            if *v0 == 0.0 {
                return Ok(free_amplitudes());
            }
            let mut amp = compose(scales, energy, -half_width, *half_width, &[*v0]);
            amp.slices = 0;
            return Ok(amp);
        }
        PotentialSpec::GaussianPolynomial { .. } => {}
    }
    let bounds = interaction_bounds(spec, TAIL_TOLERANCE)?;
    let mut n = INITIAL_SLICES;
    let mut previous = extrapolated(spec, scales, energy, &bounds, n / 2);
    let mut iterations = 0;
    while n <= MAX_SLICES / 2 {
        iterations += 1;
        let current = extrapolated(spec, scales, energy, &bounds, n);
        let beta_ok = (current.beta - previous.beta).norm() <= REFINEMENT_TOLERANCE * current.beta.norm();
        let alpha_ok = (current.alpha - previous.alpha).norm() <= REFINEMENT_TOLERANCE;
        if beta_ok && alpha_ok {
            return Ok(current);
        }
        previous = current;
        n *= 2;
    }
    let last = extrapolated(spec, scales, energy, &bounds, n / 2);
    Err(Error::ConvergenceFailure {
        iterations,
        previous: previous.beta,
        last: last.beta,
    })
}

/// Amplitudes at a fixed extrapolated resolution (`slices` as returned by
/// [`amplitudes`]); used for finite differences in energy so that neighbouring
/// points share the same discretization.
pub fn amplitudes_at_resolution(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    energy: C,
    slices: usize,
) -> Result<Amplitudes> {
    if slices == 0 {
        return amplitudes(spec, scales, energy);
    }
    check_energy(energy)?;
    let bounds = interaction_bounds(spec, TAIL_TOLERANCE)?;
    Ok(extrapolated(spec, scales, energy, &bounds, (slices / 2).max(1)))
}

/// Amplitudes at a real energy `E > 0`.
pub fn transmit(spec: &PotentialSpec, scales: &PhysicalScales, energy: f64) -> Result<ScatteringResult> {
    if !(energy > ZERO_ENERGY_GUARD) {
        return Err(Error::Precondition(format!(
            "scattering energy must exceed {ZERO_ENERGY_GUARD}, got {energy}"
        )));
    }
    let amp = amplitudes(spec, scales, C::new(energy, 0.0))?;
    Ok(ScatteringResult::from_amplitudes(energy, amp.alpha, amp.beta))
}

/// Textbook amplitudes of the square barrier (or well) `v0` on `|x| <= w`,
/// valid for complex `E`. The `E = v0` limit needs no special case because
/// `sin(2qw)/q` is evaluated as an entire function of `q^2`.
pub fn rectangular_amplitudes(v0: f64, half_width: f64, scales: &PhysicalScales, energy: C) -> (C, C) {
    let two_m = 2.0 * scales.mass / (scales.hbar * scales.hbar);
    let k = (two_m * energy).sqrt();
    let q2 = two_m * (energy - v0);
    let q = q2.sqrt();
    let width = 2.0 * half_width;
    let sin_over_q = width * sinc(q * width);
    let cos = (q * width).cos();
    let denom = cos - C::i() * (k * k + q2) / (2.0 * k) * sin_over_q;
    let phase = (-C::i() * k * width).exp();
    let beta = phase / denom;
    let alpha = phase * C::i() * (q2 - k * k) / (2.0 * k) * sin_over_q / denom;
    (alpha, beta)
}

fn sinc(z: C) -> C {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        C::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Closed-form oracle for the square barrier at a real energy.
pub fn rectangular_closed_form(
    v0: f64,
    half_width: f64,
    scales: &PhysicalScales,
    energy: f64,
) -> Result<ScatteringResult> {
    if !(energy > 0.0) {
        return Err(Error::Precondition(format!(
            "scattering energy must be positive, got {energy}"
        )));
    }
    if !(half_width > 0.0) {
        return Err(Error::InvalidPotential(format!(
            "half_width must be positive, got {half_width}"
        )));
    }
    let (alpha, beta) = rectangular_amplitudes(v0, half_width, scales, C::new(energy, 0.0));
    Ok(ScatteringResult::from_amplitudes(energy, alpha, beta))
}

/// Scattering results on an energy grid with `Re Phi` continued across it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub grid: Vec<f64>,
    pub results: Vec<ScatteringResult>,
}

/// Largest wrapped phase increment accepted between adjacent grid points.
pub const UNWRAP_LIMIT: f64 = FRAC_PI_2;

fn wrap(delta: f64) -> f64 {
    let mut d = delta % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Eikonal estimate `Re int (q(x) - k) dx` of the transmitted phase.
pub fn eikonal_phase(spec: &PotentialSpec, scales: &PhysicalScales, energy: f64) -> Result<f64> {
    let e = C::new(energy, 0.0);
    let k = wavenumber(scales, e, 0.0).re;
    match spec {
        PotentialSpec::Zero => Ok(0.0),
        PotentialSpec::Rectangular { v0, half_width } => {
            Ok((wavenumber(scales, e, *v0).re - k) * 2.0 * half_width)
        }
        PotentialSpec::GaussianPolynomial { .. } => {
            let bounds = interaction_bounds(spec, TAIL_TOLERANCE)?;
            let nodes = composite_nodes(bounds.a, bounds.b, 400, &legendre_rule(8));
            Ok(nodes
                .iter()
                .map(|&(x, w)| w * (wavenumber(scales, e, spec.value(x)).re - k))
                .sum())
        }
    }
}

/// Continuous `Re Phi` at `energy`, obtained by continuation from an energy
/// high enough that the eikonal estimate fixes the branch.
fn anchored_phase(spec: &PotentialSpec, scales: &PhysicalScales, energy: f64, beta: C) -> Result<f64> {
    let (width, vmin, vmax) = match spec {
        PotentialSpec::Rectangular { v0, half_width } => (2.0 * half_width, v0.min(0.0), v0.max(0.0)),
        _ => {
            let bounds = interaction_bounds(spec, TAIL_TOLERANCE)?;
            let (lo, hi) = spec.range_on(bounds.a, bounds.b);
            (bounds.width(), lo.min(0.0), hi.max(0.0))
        }
    };
    let mut reference = energy.max(4.0 * vmax.max(-vmin));
    while eikonal_phase(spec, scales, reference)?.abs() > 0.5 {
        reference *= 2.0;
    }
    let beta_ref = if reference == energy {
        beta
    } else {
        transmit(spec, scales, reference)?.beta
    };
    let estimate = eikonal_phase(spec, scales, reference)?;
    let mut phase = beta_ref.arg() + 2.0 * PI * ((estimate - beta_ref.arg()) / (2.0 * PI)).round();
    // |d(q - k)| over a step is bounded by the change of q at the highest barrier
    let local_k = |e: f64| (2.0 * scales.mass * (e - vmax).max(0.0)).sqrt() / scales.hbar;
    let phase_bound = |hi: f64, lo: f64| {
        let dq = if lo >= vmax {
            local_k(hi) - local_k(lo)
        } else {
            (2.0 * scales.mass * (hi - lo)).sqrt() / scales.hbar
        };
        width * dq
    };
    let mut e = reference;
    let mut arg = beta_ref.arg();
    let mut step = (reference - energy) / 16.0;
    while e > energy {
        let next = (e - step).max(energy);
        if phase_bound(e, next) > FRAC_PI_4 {
            step *= 0.5;
            if step < 1e-14 * reference {
                return Err(Error::UnwrapAmbiguity { lower: next, upper: e });
            }
            continue;
        }
        let next_arg = if next == energy {
            beta.arg()
        } else {
            transmit(spec, scales, next)?.beta.arg()
        };
        let delta = wrap(next_arg - arg);
        if delta.abs() > FRAC_PI_4 {
            step *= 0.5;
            if step < 1e-12 * reference {
                return Err(Error::UnwrapAmbiguity { lower: next, upper: e });
            }
            continue;
        }
        phase += delta;
        arg = next_arg;
        e = next;
        step *= 1.5;
    }
    Ok(phase)
}

/// Amplitudes on `grid` with `Re Phi` unwrapped by nearest-branch
/// continuation downward from the top of the grid.
pub fn phase_curve(spec: &PotentialSpec, scales: &PhysicalScales, grid: &[f64]) -> Result<PhaseCurve> {
    if grid.is_empty() {
        return Err(Error::Precondition("energy grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("energy grid must be strictly increasing".into()));
    }
    if !(grid[0] > ZERO_ENERGY_GUARD) {
        return Err(Error::Precondition(format!(
            "energy grid must start above {ZERO_ENERGY_GUARD}, got {}",
            grid[0]
        )));
    }
    let mut results: Vec<ScatteringResult> = grid
        .par_iter()
        .map(|&e| transmit(spec, scales, e))
        .collect::<Result<Vec<_>>>()?;
    let top = results.len() - 1;
    let mut phase = anchored_phase(spec, scales, grid[top], results[top].beta)?;
    results[top].phi.re = phase;
    for j in (0..top).rev() {
        let delta = wrap(results[j].beta.arg() - results[j + 1].beta.arg());
        if delta.abs() >= UNWRAP_LIMIT {
            return Err(Error::UnwrapAmbiguity {
                lower: grid[j],
                upper: grid[j + 1],
            });
        }
        phase += delta;
        results[j].phi.re = phase;
    }
    Ok(PhaseCurve {
        grid: grid.to_vec(),
        results,
    })
}

/// `(1/pi) dPhi/dE` on every grid point: second-order central differences
/// inside, second-order one-sided differences at the ends.
pub fn density_from_phase(curve: &PhaseCurve) -> Result<Vec<C>> {
    let n = curve.grid.len();
    if n < 3 {
        return Err(Error::Precondition("density needs at least 3 grid points".into()));
    }
    let x = &curve.grid;
    let f: Vec<C> = curve.results.iter().map(|r| r.phi).collect();
    // derivative at x[i] of the parabola through (j0, j1, j2)
    let parabola = |i: usize, j: [usize; 3]| -> C {
        let mut d = C::new(0.0, 0.0);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let (xa, xb, xc) = (x[j[a]], x[j[b]], x[j[c]]);
            let weight = ((x[i] - xb) + (x[i] - xc)) / ((xa - xb) * (xa - xc));
            d += f[j[a]] * weight;
        }
        d
    };
    Ok((0..n)
        .map(|i| {
            let stencil = if i == 0 {
                [0, 1, 2]
            } else if i == n - 1 {
                [n - 3, n - 2, n - 1]
            } else {
                [i - 1, i, i + 1]
            };
            parabola(i, stencil) / PI
        })
        .collect())
}

/// Oracle density `-(i/pi) d ln(beta)/dE` at a single (possibly complex)
/// energy, by a fourth-order central difference at fixed resolution.
pub fn oracle_density(spec: &PotentialSpec, scales: &PhysicalScales, energy: C) -> Result<C> {
    let centre = amplitudes(spec, scales, energy)?;
    let h = 1e-4 * energy.norm().max(1e-2).min(1.0);
    if energy.im == 0.0 && energy.re - 2.0 * h <= ZERO_ENERGY_GUARD {
        return Err(Error::Precondition(format!(
            "energy {} too close to zero for a centred difference",
            energy.re
        )));
    }
    let log_beta = |e: C| -> Result<C> {
        Ok(amplitudes_at_resolution(spec, scales, e, centre.slices)?.beta)
    };
    let b0 = centre.beta;
    let ratio = |sign: f64, mult: f64| -> Result<C> {
        Ok((log_beta(energy + sign * mult * h)? / b0).ln())
    };
    let d1 = (ratio(1.0, 1.0)? - ratio(-1.0, 1.0)?) / (2.0 * h);
    let d2 = (ratio(1.0, 2.0)? - ratio(-1.0, 2.0)?) / (4.0 * h);
    let derivative = (4.0 * d1 - d2) / 3.0;
    Ok(-C::i() / PI * derivative)
}
