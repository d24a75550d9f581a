//! Complex-scaled Hamiltonians in a box sine basis, their spectra and the
//! pole-sum continuum level density.
//!
//! The basis is `phi_j(x) = sqrt(2/L) sin(j pi (x + L/2) / L)`, `j = 1..M`.
//! Every matrix element reduces to cosine transforms
//! `C_g(n) = (1/L) int g(x) cos(n pi (x + L/2) / L) dx`:
//!
//! * `<phi_j| g |phi_k> = C_g(|j-k|) - C_g(j+k)`
//! * `<phi_j'| g |phi_k'> = (j k pi^2 / L^2) (C_g(|j-k|) + C_g(j+k))`
//!
//! Two scaling contours are supported. The uniform rotation `x -> e^{i theta} x`
//! suits potentials that are analytic and decaying in a sector (the Gaussian
//! family). The smooth exterior contour leaves `|x| <= r0` on the real axis
//! and bends onto the ray `e^{i theta}` beyond `r1`; it is required for
//! potentials that are not analytic (the square barrier).

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::potential::{evaluate, interaction_bounds, PhysicalScales, PotentialSpec};
use crate::quadrature::{composite_nodes, legendre_rule};

type C = Complex64;

/// Default angular distance from the continuum ray below which an
/// eigenvalue counts as a continuum state.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Minimum distance between an evaluation point and any pole.
pub const POLE_GUARD: f64 = 1e-12;
const PANEL_ORDER: usize = 16;
const QUADRATURE_TOLERANCE: f64 = 1e-11;
const MAX_DOUBLINGS: usize = 4;

/// A point `E - i Gamma / 2` of the complex energy plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEnergy {
    pub e: f64,
    pub gamma: f64,
}

impl ComplexEnergy {
    pub fn new(e: f64, gamma: f64) -> Self {
        ComplexEnergy { e, gamma }
    }

    pub fn from_complex(z: C) -> Self {
        ComplexEnergy {
            e: z.re,
            gamma: -2.0 * z.im,
        }
    }

    pub fn value(&self) -> C {
        C::new(self.e, -0.5 * self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour {
    /// `x -> e^{i theta} x` everywhere.
    Uniform,
    /// Real on `|x| <= inner`, rotated by `theta` beyond `outer`, joined by a
    /// C^4 smoothstep.
    Exterior { inner: f64, outer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexScalingConfig {
    pub theta: f64,
    pub box_length: f64,
    pub basis_size: usize,
    /// Quadrature nodes for the matrix elements; `None` selects
    /// `max(4 M, 2048)` or more if the highest basis frequency demands it.
    pub quadrature_points: Option<usize>,
    pub contour: Contour,
}

impl ComplexScalingConfig {
    pub fn new(theta: f64, box_length: f64, basis_size: usize) -> Self {
        ComplexScalingConfig {
            theta,
            box_length,
            basis_size,
            quadrature_points: None,
            contour: Contour::Uniform,
        }
    }

    pub fn with_exterior(mut self, inner: f64, outer: f64) -> Self {
        self.contour = Contour::Exterior { inner, outer };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta < FRAC_PI_4) {
            return Err(Error::DivergentRotation { theta: self.theta });
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "box_length",
                reason: format!("must be positive, got {}", self.box_length),
            });
        }
        if self.basis_size == 0 {
            return Err(Error::InvalidParameter {
                name: "basis_size",
                reason: "must be positive".into(),
            });
        }
        if let Contour::Exterior { inner, outer } = self.contour {
            if !(inner >= 0.0 && outer > inner && outer < 0.5 * self.box_length) {
                return Err(Error::InvalidParameter {
                    name: "contour",
                    reason: format!(
                        "need 0 <= inner < outer < L/2, got inner = {inner}, outer = {outer}, L = {}",
                        self.box_length
                    ),
                });
            }
        }
        Ok(())
    }

    /// `int F'(x) dx` over the box: the complex length seen by the kinetic term.
    pub fn complex_length(&self) -> C {
        let rot = C::from_polar(1.0, self.theta);
        match self.contour {
            Contour::Uniform => rot * self.box_length,
            Contour::Exterior { inner, outer } => {
                C::new(self.box_length, 0.0) + (rot - 1.0) * (self.box_length - inner - outer)
            }
        }
    }

    /// Argument of the rotated continuum ray in the energy plane.
    pub fn ray_angle(&self) -> f64 {
        -2.0 * self.complex_length().arg()
    }
}

/// Cosine transforms `C_g(n)`, `n = 0..=nmax`, from nodes `(x, w g(x))`.
fn cosine_transform(weighted: &[(f64, C)], box_length: f64, nmax: usize) -> Vec<C> {
    const RESEED: usize = 64;
    let mut out = vec![C::new(0.0, 0.0); nmax + 1];
    for &(x, wg) in weighted {
        let angle = PI * (x + 0.5 * box_length) / box_length;
        let step = C::from_polar(1.0, angle);
        let mut z = C::new(1.0, 0.0);
        for (n, slot) in out.iter_mut().enumerate() {
            if n % RESEED == 0 && n > 0 {
                z = C::from_polar(1.0, angle * n as f64);
            }
            *slot += wg * z.re;
            z *= step;
        }
    }
    let inv = 1.0 / box_length;
    out.iter_mut().for_each(|c| *c *= inv);
    out
}

/// Cosine transforms of `g` over `pieces`, with node count doubled until two
/// successive results agree.
fn converged_transform(
    g: &(dyn Fn(f64) -> Result<C> + Sync),
    pieces: &[(f64, f64)],
    config: &ComplexScalingConfig,
    nmax: usize,
) -> Result<Vec<C>> {
    let total: f64 = pieces.iter().map(|(a, b)| b - a).sum();
    if total <= 0.0 {
        return Ok(vec![C::new(0.0, 0.0); nmax + 1]);
    }
    let shortest_wavelength = 2.0 * config.box_length / nmax.max(1) as f64;
    let requested = config
        .quadrature_points
        .unwrap_or_else(|| (4 * config.basis_size).max(2048));
    let mut nodes = requested.max((8.0 * total / shortest_wavelength) as usize);
    let rule = legendre_rule(PANEL_ORDER);
    let evaluate_at = |count: usize| -> Result<Vec<C>> {
        let mut weighted = Vec::with_capacity(count + pieces.len() * PANEL_ORDER);
        for &(a, b) in pieces {
            let panels = ((count as f64 * (b - a) / total) / PANEL_ORDER as f64).ceil().max(1.0) as usize;
            for (x, w) in composite_nodes(a, b, panels, &rule) {
                weighted.push((x, w * g(x)?));
            }
        }
        Ok(cosine_transform(&weighted, config.box_length, nmax))
    };
    let mut previous = evaluate_at(nodes)?;
    let mut residual = f64::INFINITY;
    for _ in 0..=MAX_DOUBLINGS {
        nodes *= 2;
        let current = evaluate_at(nodes)?;
        let scale = current.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        residual = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        if residual <= QUADRATURE_TOLERANCE {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureFailure { residual })
}

struct Smoothstep {
    inner: f64,
    width: f64,
    rot: C,
}

impl Smoothstep {
    fn xi(&self, x: f64) -> f64 {
        ((x.abs() - self.inner) / self.width).clamp(0.0, 1.0)
    }

    fn s(xi: f64) -> f64 {
        xi.powi(5) * (126.0 - 420.0 * xi + 540.0 * xi * xi - 315.0 * xi.powi(3) + 70.0 * xi.powi(4))
    }

    fn ds(xi: f64) -> f64 {
        630.0 * xi.powi(4) * (1.0 - xi).powi(4)
    }

    fn d2s(xi: f64) -> f64 {
        2520.0 * xi.powi(3) * (1.0 - xi).powi(3) * (1.0 - 2.0 * xi)
    }

    /// `int_0^xi s`.
    fn integral(xi: f64) -> f64 {
        xi.powi(6) * (21.0 - 60.0 * xi + 67.5 * xi * xi - 35.0 * xi.powi(3) + 7.0 * xi.powi(4))
    }

    /// Contour point `F(x)`.
    fn point(&self, x: f64) -> C {
        let ax = x.abs();
        let q = self.rot - 1.0;
        let outer = self.inner + self.width;
        let shift = q * self.width * Self::integral(self.xi(x)) + q * (ax - outer).max(0.0);
        x.signum() * (C::new(ax, 0.0) + shift)
    }

    /// `(F', F'', F''')` at `x`.
    fn derivatives(&self, x: f64) -> (C, C, C) {
        let xi = self.xi(x);
        let q = self.rot - 1.0;
        (
            1.0 + q * Self::s(xi),
            q * Self::ds(xi) / self.width * x.signum(),
            q * Self::d2s(xi) / (self.width * self.width),
        )
    }
}

/// Integration pieces covering the support of `V` along the contour.
fn potential_pieces(spec: &PotentialSpec, config: &ComplexScalingConfig) -> Result<Vec<(f64, f64)>> {
    let half = 0.5 * config.box_length;
    match spec {
        PotentialSpec::Zero => Ok(Vec::new()),
        PotentialSpec::Rectangular { half_width, .. } => match config.contour {
            Contour::Exterior { inner, .. } if inner >= *half_width => {
                if *half_width >= half {
                    return Err(Error::Precondition(format!(
                        "box length {} does not contain the barrier of half-width {half_width}",
                        config.box_length
                    )));
                }
                Ok(vec![(-half_width, *half_width)])
            }
            _ => Err(Error::Precondition(
                "the square barrier is not analytic; use an exterior contour with inner >= half_width"
                    .into(),
            )),
        },
        PotentialSpec::GaussianPolynomial { .. } => {
            let mut kinks = vec![-half, half];
            if let Contour::Exterior { inner, outer } = config.contour {
                kinks.extend([-outer, -inner, inner, outer]);
            }
            let path = contour_map(config);
            let samples = 20_000;
            let xs: Vec<f64> = (0..=samples)
                .map(|i| -half + config.box_length * i as f64 / samples as f64)
                .collect();
            let mags: Vec<f64> = xs
                .iter()
                .map(|&x| evaluate(spec, path(x)).map(|v| v.norm()))
                .collect::<Result<_>>()?;
            let peak = mags.iter().cloned().fold(0.0, f64::max);
            if mags[0] > 1e-10 * peak || mags[samples] > 1e-10 * peak {
                return Err(Error::Precondition(format!(
                    "box length {} is too short for the rotated potential",
                    config.box_length
                )));
            }
            let keep = |m: f64| m > 1e-16 * peak;
            let first = mags.iter().position(|&m| keep(m)).unwrap_or(0);
            let last = mags.iter().rposition(|&m| keep(m)).unwrap_or(samples);
            let lo = xs[first.saturating_sub(1)];
            let hi = xs[(last + 1).min(samples)];
            let mut cuts: Vec<f64> = kinks.into_iter().filter(|&k| k > lo && k < hi).collect();
            cuts.push(lo);
            cuts.push(hi);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect())
        }
    }
}

fn contour_map(config: &ComplexScalingConfig) -> Box<dyn Fn(f64) -> C + Sync> {
    let rot = C::from_polar(1.0, config.theta);
    match config.contour {
        Contour::Uniform => Box::new(move |x| rot * x),
        Contour::Exterior { inner, outer } => {
            let step = Smoothstep {
                inner,
                width: outer - inner,
                rot,
            };
            Box::new(move |x| step.point(x))
        }
    }
}

fn potential_block(c: &[C], m: usize, factor: f64) -> Mat<C> {
    Mat::from_fn(m, m, |j, k| {
        let (j, k) = (j + 1, k + 1);
        factor * (c[j.abs_diff(k)] - c[j + k])
    })
}

fn derivative_block(c: &[C], m: usize, box_length: f64, factor: f64) -> Mat<C> {
    let f = factor * PI * PI / (box_length * box_length);
    Mat::from_fn(m, m, |j, k| {
        let (j, k) = (j + 1, k + 1);
        (j * k) as f64 * f * (c[j.abs_diff(k)] + c[j + k])
    })
}

/// The complex-scaled Hamiltonian in the box sine basis (complex symmetric).
pub fn build_hamiltonian(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    config: &ComplexScalingConfig,
) -> Result<Mat<C>> {
    config.validate()?;
    if config.contour == Contour::Uniform && !spec.is_zero() {
        let bounds = interaction_bounds(spec, 1e-12)?;
        if bounds.width() >= config.box_length {
            return Err(Error::Precondition(format!(
                "box length {} must exceed the interaction width {}",
                config.box_length,
                bounds.width()
            )));
        }
    }
    let m = config.basis_size;
    let nmax = 2 * m + 2;
    let l = config.box_length;
    let kinetic = scales.hbar * scales.hbar / (2.0 * scales.mass);
    let rot2 = C::from_polar(1.0, -2.0 * config.theta);

    let mut h = Mat::<C>::from_fn(m, m, |j, k| {
        if j == k {
            let n = (j + 1) as f64;
            rot2 * kinetic * (n * PI / l).powi(2)
        } else {
            C::new(0.0, 0.0)
        }
    });

    if !spec.is_zero() {
        let path = contour_map(config);
        let pieces = potential_pieces(spec, config)?;
        let v = |x: f64| evaluate(spec, path(x));
        let c = converged_transform(&v, &pieces, config, nmax)?;
        h += potential_block(&c, m, 1.0);
    }

    if let Contour::Exterior { inner, outer } = config.contour {
        let step = Smoothstep {
            inner,
            width: outer - inner,
            rot: C::from_polar(1.0, config.theta),
        };
        let pieces = [(-outer, -inner), (-inner, inner), (inner, outer)];
        let bend = |x: f64| -> Result<C> {
            let (f1, _, _) = step.derivatives(x);
            Ok(1.0 / (f1 * f1) - rot2)
        };
        let curvature = |x: f64| -> Result<C> {
            let (f1, f2, f3) = step.derivatives(x);
            let f1_3 = f1 * f1 * f1;
            let f1_4 = f1_3 * f1;
            let g2p = f3 / f1_3 - 3.0 * f2 * f2 / f1_4;
            let g3 = f2 * f2 / f1_4;
            Ok(0.5 * g2p + 0.25 * g3)
        };
        let cb = converged_transform(&bend, &pieces, config, nmax)?;
        let cc = converged_transform(&curvature, &pieces, config, nmax)?;
        h += derivative_block(&cb, m, l, kinetic);
        h += potential_block(&cc, m, kinetic);
    }
    Ok(h)
}

/// Eigenvalues of a general complex matrix, sorted by real then imaginary part.
pub fn diagonalize(matrix: &Mat<C>) -> Result<Vec<C>> {
    let size = matrix.nrows();
    if matrix.ncols() != size {
        return Err(Error::Precondition("matrix must be square".into()));
    }
    let scale = (0..size)
        .flat_map(|j| (0..size).map(move |k| (j, k)))
        .map(|(j, k)| matrix[(j, k)].norm())
        .fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::EigensolverFailure { size, scale });
    }
    let mut values = matrix
        .eigenvalues()
        .map_err(|_| Error::EigensolverFailure { size, scale })?;
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::EigensolverFailure { size, scale });
    }
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

/// Spectrum of the scaled free Hamiltonian. Analytic on the uniform ray;
/// for the exterior contour the same truncated free matrix is diagonalized so
/// that basis-truncation errors cancel in the density.
pub fn free_spectrum(scales: &PhysicalScales, config: &ComplexScalingConfig) -> Result<Vec<ComplexEnergy>> {
    config.validate()?;
    match config.contour {
        Contour::Uniform => {
            let kinetic = scales.hbar * scales.hbar / (2.0 * scales.mass);
            let rot2 = C::from_polar(1.0, -2.0 * config.theta);
            Ok((1..=config.basis_size)
                .map(|l| {
                    let z = rot2 * kinetic * (l as f64 * PI / config.box_length).powi(2);
                    ComplexEnergy::from_complex(z)
                })
                .collect())
        }
        Contour::Exterior { .. } => {
            let h = build_hamiltonian(&PotentialSpec::Zero, scales, config)?;
            Ok(diagonalize(&h)?.into_iter().map(ComplexEnergy::from_complex).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Bound,
    Resonance,
    Continuum,
    Free,
}

impl StateClass {
    pub fn label(&self) -> &'static str {
        match self {
            StateClass::Bound => "bound",
            StateClass::Resonance => "resonance",
            StateClass::Continuum => "continuum",
            StateClass::Free => "free",
        }
    }
}

/// Classified eigenvalues of the scaled full and free Hamiltonians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSet {
    pub resonances: Vec<ComplexEnergy>,
    pub bound_states: Vec<ComplexEnergy>,
    pub continuum_states: Vec<ComplexEnergy>,
    pub free_states: Vec<ComplexEnergy>,
    pub theta: f64,
    /// Argument of the continuum ray (`-2 theta` for the uniform contour).
    pub ray_angle: f64,
    /// Number of uncovered resonances.
    pub n_theta: usize,
}

impl SpectralSet {
    /// All eigenvalues of the full Hamiltonian.
    pub fn full_poles(&self) -> impl Iterator<Item = C> + '_ {
        self.bound_states
            .iter()
            .chain(&self.resonances)
            .chain(&self.continuum_states)
            .map(|p| p.value())
    }

    pub fn free_poles(&self) -> impl Iterator<Item = C> + '_ {
        self.free_states.iter().map(|p| p.value())
    }

    /// Every eigenvalue with its class, full states before free states.
    pub fn labelled(&self) -> Vec<(ComplexEnergy, StateClass)> {
        let mut out: Vec<(ComplexEnergy, StateClass)> = Vec::new();
        let mut full: Vec<(ComplexEnergy, StateClass)> = self
            .bound_states
            .iter()
            .map(|p| (*p, StateClass::Bound))
            .chain(self.resonances.iter().map(|p| (*p, StateClass::Resonance)))
            .chain(self.continuum_states.iter().map(|p| (*p, StateClass::Continuum)))
            .collect();
        full.sort_by(|a, b| a.0.e.total_cmp(&b.0.e).then(a.0.gamma.total_cmp(&b.0.gamma)));
        out.extend(full);
        out.extend(self.free_states.iter().map(|p| (*p, StateClass::Free)));
        out
    }
}

/// Partition eigenvalues of the full scaled Hamiltonian.
///
/// With `tol = 1e-8 max|E|`: points with `Re E < 0` and `|Im E| <= tol` are
/// bound states; points with `Re E >= 0`, argument above `ray + margin` and
/// `Im E <= tol` are resonances; points with `Im E > tol` are anomalies;
/// everything else belongs to the rotated continuum.
pub fn classify(
    eigenvalues: &[C],
    free_states: Vec<ComplexEnergy>,
    config: &ComplexScalingConfig,
    margin: f64,
) -> Result<SpectralSet> {
    if !(margin > 0.0) {
        return Err(Error::InvalidParameter {
            name: "margin",
            reason: format!("must be positive, got {margin}"),
        });
    }
    let ray = config.ray_angle();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-8 * scale.max(1e-300);
    let mut set = SpectralSet {
        resonances: Vec::new(),
        bound_states: Vec::new(),
        continuum_states: Vec::new(),
        free_states,
        theta: config.theta,
        ray_angle: ray,
        n_theta: 0,
    };
    for (index, &z) in eigenvalues.iter().enumerate() {
        if z.im > tol {
            return Err(Error::ClassificationAnomaly { index, value: z });
        }
        let point = ComplexEnergy::from_complex(z);
        if z.re < 0.0 {
            if z.im.abs() <= tol {
                set.bound_states.push(point);
            } else {
                set.continuum_states.push(point);
            }
        } else if z.im >= -tol || z.arg() > ray + margin {
            set.resonances.push(point);
        } else {
            set.continuum_states.push(point);
        }
    }
    set.n_theta = set.resonances.len();
    Ok(set)
}

/// Assemble, diagonalize and classify in one step.
pub fn spectral_set(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    config: &ComplexScalingConfig,
    margin: f64,
) -> Result<SpectralSet> {
    let h = build_hamiltonian(spec, scales, config)?;
    let eigenvalues = diagonalize(&h)?;
    let free = free_spectrum(scales, config)?;
    classify(&eigenvalues, free, config, margin)
}

/// Neumaier-compensated sum, smallest magnitudes first.
fn stable_sum(mut terms: Vec<C>) -> C {
    terms.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut sum = C::new(0.0, 0.0);
    let mut comp = C::new(0.0, 0.0);
    for t in terms {
        for (s, c, v) in [(&mut sum.re, &mut comp.re, t.re), (&mut sum.im, &mut comp.im, t.im)] {
            let next = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - next) + v;
            } else {
                *c += (v - next) + *s;
            }
            *s = next;
        }
    }
    sum + comp
}

/// `(i/pi) [sum_full 1/(z - E_n) - sum_free 1/(z - E_l)]`.
pub fn cld_at(point: C, set: &SpectralSet) -> Result<C> {
    let mut terms = Vec::with_capacity(set.free_states.len() * 2);
    for (index, pole) in set.full_poles().enumerate() {
        let d = point - pole;
        if d.norm() <= POLE_GUARD {
            return Err(Error::PoleProximity {
                index,
                point,
                distance: d.norm(),
            });
        }
        terms.push(1.0 / d);
    }
    for (index, pole) in set.free_poles().enumerate() {
        let d = point - pole;
        if d.norm() <= POLE_GUARD {
            return Err(Error::PoleProximity {
                index,
                point,
                distance: d.norm(),
            });
        }
        terms.push(-1.0 / d);
    }
    Ok(C::i() / PI * stable_sum(terms))
}

/// Densities evaluated at a list of complex energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub points: Vec<ComplexEnergy>,
    pub values: Vec<C>,
    pub epsilon: f64,
}

/// `Delta rho(E + i epsilon)` on a real grid.
pub fn cld_real_axis(set: &SpectralSet, grid: &[f64], epsilon: f64) -> Result<DensityGrid> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must be non-negative, got {epsilon}"),
        });
    }
    let values = grid
        .par_iter()
        .map(|&e| cld_at(C::new(e, epsilon), set))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid {
        points: grid.iter().map(|&e| ComplexEnergy::new(e, 0.0)).collect(),
        values,
        epsilon,
    })
}

/// Density on the tensor grid `energies x gammas` (row-major in energy).
pub fn density_map(set: &SpectralSet, energies: &[f64], gammas: &[f64]) -> Result<DensityGrid> {
    let points: Vec<ComplexEnergy> = energies
        .iter()
        .flat_map(|&e| gammas.iter().map(move |&g| ComplexEnergy::new(e, g)))
        .collect();
    let values = points
        .par_iter()
        .map(|p| cld_at(p.value(), set))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid {
        points,
        values,
        epsilon: 0.0,
    })
}

/// Axis-aligned rectangle in `(E, Gamma)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRectangle {
    pub e_min: f64,
    pub e_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl EnergyRectangle {
    pub fn contains(&self, p: &ComplexEnergy) -> bool {
        p.e > self.e_min && p.e < self.e_max && p.gamma > self.gamma_min && p.gamma < self.gamma_max
    }

    /// Distance in the complex energy plane from `z` to the boundary.
    fn boundary_distance(&self, z: C) -> f64 {
        let (x0, x1) = (self.e_min, self.e_max);
        let (y0, y1) = (-0.5 * self.gamma_max, -0.5 * self.gamma_min);
        let seg = |a: C, b: C| {
            let ab = b - a;
            let t = (((z - a).conj() * ab).re / ab.norm_sqr()).clamp(0.0, 1.0);
            (z - (a + t * ab)).norm()
        };
        let c = [C::new(x0, y0), C::new(x1, y0), C::new(x1, y1), C::new(x0, y1)];
        (0..4).map(|i| seg(c[i], c[(i + 1) % 4])).fold(f64::INFINITY, f64::min)
    }

    /// Corners in counter-clockwise `(E, Gamma)` order, as complex energies.
    fn corners(&self) -> [C; 4] {
        [
            ComplexEnergy::new(self.e_min, self.gamma_min).value(),
            ComplexEnergy::new(self.e_max, self.gamma_min).value(),
            ComplexEnergy::new(self.e_max, self.gamma_max).value(),
            ComplexEnergy::new(self.e_min, self.gamma_max).value(),
        ]
    }
}

/// Number of full and free poles strictly inside the rectangle.
pub fn count_poles(set: &SpectralSet, rect: &EnergyRectangle) -> (usize, usize) {
    let full = set
        .full_poles()
        .filter(|z| rect.contains(&ComplexEnergy::from_complex(*z)))
        .count();
    let free = set.free_states.iter().filter(|p| rect.contains(p)).count();
    (full, free)
}

/// Contour integral of the density around the rectangle, traversed
/// counter-clockwise in `(E, Gamma)`; equals `2 (N_full - N_free)` inside.
///
/// Each edge is split into Gauss–Legendre panels of `samples` nodes, with
/// panels refined until shorter than half the distance to the nearest pole.
pub fn contour_count(set: &SpectralSet, rect: &EnergyRectangle, samples: usize) -> Result<C> {
    if !(rect.e_max > rect.e_min && rect.gamma_max > rect.gamma_min) {
        return Err(Error::Precondition("rectangle must have positive extent".into()));
    }
    let poles: Vec<C> = set.full_poles().chain(set.free_poles()).collect();
    let n_full = set.full_poles().count();
    for (i, &p) in poles.iter().enumerate() {
        let d = rect.boundary_distance(p);
        if d <= 1e-6 {
            return Err(Error::PoleProximity {
                index: if i < n_full { i } else { i - n_full },
                point: p,
                distance: d,
            });
        }
    }
    let nearest = |z: C| poles.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
    let rule = legendre_rule(samples.max(2));
    let corners = rect.corners();
    let mut total = C::new(0.0, 0.0);
    for i in 0..4 {
        let mut stack = vec![(corners[i], corners[(i + 1) % 4])];
        while let Some((a, b)) = stack.pop() {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            if 2.0 * half.norm() > 0.5 * nearest(mid) && half.norm() > 1e-9 {
                stack.push((mid, b));
                stack.push((a, mid));
                continue;
            }
            for &(t, w) in &rule {
                total += w * half * cld_at(mid + t * half, set)?;
            }
        }
    }
    Ok(total)
}
