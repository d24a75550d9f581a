//! Tunneling potentials: evaluation on the real axis and along rotated
//! complex rays, stationary points and the effective interaction interval.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

/// Number of samples used when scanning an interval for roots of V'.
const STATIONARY_SAMPLES: usize = 2000;
/// Highest Taylor order inspected when classifying a stationary point.
const MAX_ORDER: usize = 8;
/// Relative magnitude below which a Taylor coefficient counts as vanishing.
const ORDER_THRESHOLD: f64 = 1e-8;
/// Default relative tolerance for [`interaction_bounds`].
pub const DEFAULT_BOUNDS_TOLERANCE: f64 = 1e-12;

/// A one-dimensional tunneling potential that vanishes at large |x|.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `(c0 + c1 x + c2 x^2 + ...) exp(-eta x^2)`.
    GaussianPolynomial { coeffs: Vec<f64>, eta: f64 },
    /// `v0` for `|x| <= half_width`, zero outside.
    Rectangular { v0: f64, half_width: f64 },
    /// `V(x) = 0` everywhere.
    Zero,
}

impl PotentialSpec {
    pub fn gaussian_polynomial(coeffs: Vec<f64>, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "eta must be positive, got {eta}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential(
                "coefficients must be finite".into(),
            ));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidPotential(
                "at least one polynomial coefficient must be nonzero".into(),
            ));
        }
        Ok(PotentialSpec::GaussianPolynomial { coeffs, eta })
    }

    pub fn rectangular(v0: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        if !v0.is_finite() {
            return Err(Error::InvalidPotential("v0 must be finite".into()));
        }
        Ok(PotentialSpec::Rectangular { v0, half_width })
    }

    pub fn zero() -> Self {
        PotentialSpec::Zero
    }

    /// True when the potential vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Rectangular { v0, .. } => *v0 == 0.0,
            PotentialSpec::GaussianPolynomial { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
        }
    }

    pub fn is_rectangular(&self) -> bool {
        matches!(self, PotentialSpec::Rectangular { .. })
    }

    /// Potential at a real coordinate.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => {
                horner(coeffs, x) * (-eta * x * x).exp()
            }
            PotentialSpec::Rectangular { v0, half_width } => {
                if x.abs() <= *half_width {
                    *v0
                } else {
                    0.0
                }
            }
            PotentialSpec::Zero => 0.0,
        }
    }

    /// `V(x) - V(y)` without cancellation when `x` is close to `y`.
    pub fn difference(&self, x: f64, y: f64) -> f64 {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => {
                // divided difference of the polynomial by Horner recursion
                let mut px = 0.0;
                let mut dq = 0.0;
                for &c in coeffs.iter().rev() {
                    dq = px + y * dq;
                    px = px * x + c;
                }
                let ey = (-eta * y * y).exp();
                let ex = (-eta * x * x).exp();
                (x - y) * dq * ex + horner(coeffs, y) * ey * (-eta * (x - y) * (x + y)).exp_m1()
            }
            _ => self.value(x) - self.value(y),
        }
    }

    /// First derivative at a real coordinate (zero almost everywhere for the
    /// rectangular barrier).
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => {
                derivative_polynomial_value(coeffs, *eta, x) * (-eta * x * x).exp()
            }
            _ => 0.0,
        }
    }

    /// Second derivative at a real coordinate.
    pub fn second_derivative(&self, x: f64) -> f64 {
        self.taylor_coefficients(x, 2)
            .map(|t| 2.0 * t[2])
            .unwrap_or(0.0)
    }

    /// Taylor coefficients `a_k` of `V(x0 + d) = sum a_k d^k` up to `order`,
    /// obtained by exact series multiplication. `None` for the rectangular
    /// barrier, which is not analytic at its edges.
    pub fn taylor_coefficients(&self, x0: f64, order: usize) -> Option<Vec<f64>> {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => {
                Some(gaussian_polynomial_taylor(coeffs, *eta, x0, order))
            }
            PotentialSpec::Zero => Some(vec![0.0; order + 1]),
            PotentialSpec::Rectangular { .. } => None,
        }
    }

    /// The inverted potential `-V(x)`.
    pub fn negated(&self) -> Self {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => PotentialSpec::GaussianPolynomial {
                coeffs: coeffs.iter().map(|c| -c).collect(),
                eta: *eta,
            },
            PotentialSpec::Rectangular { v0, half_width } => PotentialSpec::Rectangular {
                v0: -v0,
                half_width: *half_width,
            },
            PotentialSpec::Zero => PotentialSpec::Zero,
        }
    }

    /// The mirrored potential `V(-x)`.
    pub fn mirrored(&self) -> Self {
        match self {
            PotentialSpec::GaussianPolynomial { coeffs, eta } => PotentialSpec::GaussianPolynomial {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 1 { -c } else { *c })
                    .collect(),
                eta: *eta,
            },
            other => other.clone(),
        }
    }

    /// Largest |V| sampled over `[lo, hi]`, including the exact stationary
    /// values when the interval brackets them.
    pub fn max_abs(&self, lo: f64, hi: f64) -> f64 {
        match self {
            PotentialSpec::Rectangular { v0, .. } => v0.abs(),
            PotentialSpec::Zero => 0.0,
            PotentialSpec::GaussianPolynomial { .. } => {
                let n = 8000;
                let mut best = 0.0_f64;
                for i in 0..=n {
                    let x = lo + (hi - lo) * i as f64 / n as f64;
                    best = best.max(self.value(x).abs());
                }
                if let Ok(points) = find_stationary_points(self, (lo, hi)) {
                    for p in points {
                        best = best.max(p.e0.abs());
                    }
                }
                best
            }
        }
    }

    /// Largest and smallest value of V over `[lo, hi]` (stationary points
    /// included).
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            PotentialSpec::Rectangular { v0, .. } => (v0.min(0.0), v0.max(0.0)),
            PotentialSpec::Zero => (0.0, 0.0),
            PotentialSpec::GaussianPolynomial { .. } => {
                let mut min = self.value(lo).min(self.value(hi));
                let mut max = self.value(lo).max(self.value(hi));
                if let Ok(points) = find_stationary_points(self, (lo, hi)) {
                    for p in points {
                        min = min.min(p.e0);
                        max = max.max(p.e0);
                    }
                }
                (min, max)
            }
        }
    }
}

/// The potential at a (possibly complex) coordinate.
///
/// For the Gaussian family the coordinate may lie on a ray `e^{i theta} r`
/// with `|theta| < pi/4`, where the rotated Gaussian still decays. The
/// rectangular barrier is defined on the real axis only.
pub fn evaluate(spec: &PotentialSpec, x: Complex64) -> Result<Complex64> {
    match spec {
        PotentialSpec::GaussianPolynomial { coeffs, eta } => {
            if x.im != 0.0 {
                // angle of the ray through the origin, folded into (-pi/2, pi/2]
                let mut angle = x.arg();
                if angle > std::f64::consts::FRAC_PI_2 {
                    angle -= std::f64::consts::PI;
                } else if angle <= -std::f64::consts::FRAC_PI_2 {
                    angle += std::f64::consts::PI;
                }
                if angle.abs() >= FRAC_PI_4 {
                    return Err(Error::DivergentRotation { theta: angle.abs() });
                }
            }
            Ok(complex_horner(coeffs, x) * (-*eta * x * x).exp())
        }
        PotentialSpec::Rectangular { .. } => {
            if x.im != 0.0 {
                return Err(Error::UnsupportedEvaluation { x });
            }
            Ok(Complex64::new(spec.value(x.re), 0.0))
        }
        PotentialSpec::Zero => Ok(Complex64::new(0.0, 0.0)),
    }
}

/// Mass and Planck constant in the dimensionless units of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalScales {
    pub mass: f64,
    pub hbar: f64,
}

impl PhysicalScales {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass",
                reason: format!("must be positive, got {mass}"),
            });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                reason: format!("must be positive, got {hbar}"),
            });
        }
        Ok(PhysicalScales { mass, hbar })
    }

    /// Scales from the size parameter `kappa = sqrt(m) / hbar`.
    pub fn from_kappa(mass: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be positive, got {kappa}"),
            });
        }
        Self::new(mass, mass.sqrt() / kappa)
    }

    pub fn kappa(&self) -> f64 {
        self.mass.sqrt() / self.hbar
    }

    /// Asymptotic momentum `sqrt(2 m E)`.
    pub fn momentum(&self, energy: f64) -> f64 {
        (2.0 * self.mass * energy).sqrt()
    }
}

impl Default for PhysicalScales {
    fn default() -> Self {
        PhysicalScales {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Saddle,
}

/// A point where V' vanishes, with its local model `E0 + c (x - x0)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub x0: f64,
    pub e0: f64,
    pub order: u32,
    pub leading_coeff: f64,
    pub kind: StationaryKind,
}

impl StationaryPoint {
    fn classify(order: u32, leading_coeff: f64) -> StationaryKind {
        if order % 2 == 1 {
            StationaryKind::Saddle
        } else if leading_coeff > 0.0 {
            StationaryKind::Minimum
        } else {
            StationaryKind::Maximum
        }
    }
}

/// Interval `(a, b)` outside which the potential is negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionBounds {
    pub a: f64,
    pub b: f64,
    pub tolerance: f64,
    /// Set for `V = 0`; then `a = b = 0`.
    pub zero_potential: bool,
}

impl InteractionBounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("need a < b, got ({a}, {b})"),
            });
        }
        Ok(InteractionBounds {
            a,
            b,
            tolerance: 0.0,
            zero_potential: false,
        })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// All stationary points of a Gaussian-family potential inside `interval`,
/// ordered left to right.
pub fn find_stationary_points(
    spec: &PotentialSpec,
    interval: (f64, f64),
) -> Result<Vec<StationaryPoint>> {
    let (coeffs, eta) = match spec {
        PotentialSpec::GaussianPolynomial { coeffs, eta } => (coeffs, *eta),
        PotentialSpec::Zero => return Ok(Vec::new()),
        PotentialSpec::Rectangular { .. } => {
            return Err(Error::Precondition(
                "stationary points are defined for the Gaussian family only".into(),
            ))
        }
    };
    let (lo, hi) = interval;
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "empty interval ({lo}, {hi})"
        )));
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Ok(Vec::new());
    }

    // sign(V') = sign(Q) with Q = P' - 2 eta x P, which avoids underflow in the tails
    let q = |x: f64| derivative_polynomial_value(coeffs, eta, x);
    let n = STATIONARY_SAMPLES;
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let qs: Vec<f64> = xs.iter().map(|&x| q(x)).collect();

    // samples below the rounding floor of Q count as zero; a run of them is one flat root
    let floor: Vec<f64> = xs.iter().map(|&x| derivative_rounding_floor(coeffs, eta, x)).collect();
    let sign: Vec<i8> = (0..n)
        .map(|i| if qs[i].abs() <= floor[i] { 0 } else if qs[i] > 0.0 { 1 } else { -1 })
        .collect();
    let mut roots: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < n {
        if sign[i] == 0 {
            let start = i;
            while i + 1 < n && sign[i + 1] == 0 {
                i += 1;
            }
            roots.push(0.5 * (xs[start] + xs[i]));
        } else if i + 1 < n && sign[i + 1] != 0 && sign[i] != sign[i + 1] {
            roots.push(refine_root(&q, xs[i], xs[i + 1]));
        }
        i += 1;
    }
    // even-order roots of V' (saddles) touch zero without changing sign
    let scale = qs.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 1..n - 1 {
        let (l, c, r) = (qs[i - 1].abs(), qs[i].abs(), qs[i + 1].abs());
        if sign[i] != 0 && c < l && c <= r && sign[i - 1] == sign[i + 1] && c < 1e-3 * scale {
            let dq = |x: f64| {
                let h = 1e-6 * (1.0 + x.abs());
                (q(x + h) - q(x - h)) / (2.0 * h)
            };
            let (a, b) = (xs[i - 1], xs[i + 1]);
            if dq(a).signum() != dq(b).signum() {
                let x = refine_root(&dq, a, b);
                if q(x).abs() <= 1e-10 * scale {
                    roots.push(x);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let vscale = xs
        .iter()
        .map(|&x| spec.value(x).abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    roots
        .into_iter()
        .map(|x0| classify_point(spec, x0, vscale))
        .collect()
}

fn classify_point(spec: &PotentialSpec, x0: f64, vscale: f64) -> Result<StationaryPoint> {
    let taylor = spec
        .taylor_coefficients(x0, MAX_ORDER)
        .ok_or(Error::ClassificationAmbiguous { x0 })?;
    let threshold = ORDER_THRESHOLD * vscale;
    let order = (2..=MAX_ORDER)
        .find(|&k| taylor[k].abs() > threshold)
        .ok_or(Error::ClassificationAmbiguous { x0 })?;
    let c = taylor[order];
    Ok(StationaryPoint {
        x0,
        e0: taylor[0],
        order: order as u32,
        leading_coeff: c,
        kind: StationaryPoint::classify(order as u32, c),
    })
}

/// Bisection down to a bracket of a few ulps, then a Newton polish.
fn refine_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..3 {
        let h = 1e-7 * (1.0 + x.abs());
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x) / d;
        if next < a - (b - a) || next > b + (b - a) || f(next).abs() > f(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// Smallest interval outside which `|V| < tolerance * max|V|`.
pub fn interaction_bounds(spec: &PotentialSpec, tolerance: f64) -> Result<InteractionBounds> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("must lie in (0, 1), got {tolerance}"),
        });
    }
    if spec.is_zero() {
        return Ok(InteractionBounds {
            a: 0.0,
            b: 0.0,
            tolerance,
            zero_potential: true,
        });
    }
    match spec {
        PotentialSpec::Rectangular { half_width, .. } => Ok(InteractionBounds {
            a: -half_width,
            b: *half_width,
            tolerance,
            zero_potential: false,
        }),
        PotentialSpec::GaussianPolynomial { eta, .. } => {
            let reach = 60.0 / eta.sqrt();
            let step = 0.005 / eta.sqrt();
            let n = (2.0 * reach / step) as usize;
            let xs: Vec<f64> = (0..=n).map(|i| -reach + i as f64 * step).collect();
            let vs: Vec<f64> = xs.iter().map(|&x| spec.value(x).abs()).collect();
            let vmax = vs.iter().cloned().fold(0.0, f64::max);
            let threshold = tolerance * vmax;
            let first = vs.iter().position(|&v| v >= threshold).unwrap_or(0);
            let last = vs.iter().rposition(|&v| v >= threshold).unwrap_or(n);
            let above = |x: f64| spec.value(x).abs() - threshold;
            let a = if first == 0 {
                xs[0]
            } else {
                bisect_edge(&above, xs[first - 1], xs[first])
            };
            let b = if last == n {
                xs[n]
            } else {
                bisect_edge(&above, xs[last + 1], xs[last])
            };
            Ok(InteractionBounds {
                a: a.min(-f64::EPSILON),
                b: b.max(f64::EPSILON),
                tolerance,
                zero_potential: false,
            })
        }
        PotentialSpec::Zero => unreachable!(),
    }
}

/// Bisection for the crossing of `g` from negative (at `outside`) to
/// non-negative (at `inside`); returns the outermost point still inside.
fn bisect_edge(g: &dyn Fn(f64) -> f64, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (outside + inside);
        if m == outside || m == inside {
            break;
        }
        if g(m) >= 0.0 {
            inside = m;
        } else {
            outside = m;
        }
    }
    outside
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn complex_horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// `P'(x) - 2 eta x P(x)`, i.e. `V'(x) exp(eta x^2)`.
fn derivative_polynomial_value(coeffs: &[f64], eta: f64, x: f64) -> f64 {
    let p = horner(coeffs, x);
    let dp = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c);
    dp - 2.0 * eta * x * p
}

/// Rounding-error bound for [`derivative_polynomial_value`] at `x`.
fn derivative_rounding_floor(coeffs: &[f64], eta: f64, x: f64) -> f64 {
    let ax = x.abs();
    let p: f64 = coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs());
    let dp = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * ax + k as f64 * c.abs());
    64.0 * f64::EPSILON * (dp + 2.0 * eta * ax * p)
}

fn gaussian_polynomial_taylor(coeffs: &[f64], eta: f64, x0: f64, order: usize) -> Vec<f64> {
    // polynomial re-expanded around x0
    let mut poly = vec![0.0; order + 1];
    for (j, &c) in coeffs.iter().enumerate() {
        let mut binom = 1.0;
        for k in 0..=j.min(order) {
            poly[k] += c * binom * x0.powi((j - k) as i32);
            binom = binom * (j - k) as f64 / (k + 1) as f64;
        }
    }
    // exp(u) with u(d) = -2 eta x0 d - eta d^2, via (k+1) f_{k+1} = sum (j+1) u_{j+1} f_{k-j}
    let u1 = -2.0 * eta * x0;
    let u2 = -eta;
    let mut gauss = vec![0.0; order + 1];
    gauss[0] = (-eta * x0 * x0).exp();
    for k in 0..order {
        let mut acc = u1 * gauss[k];
        if k >= 1 {
            acc += 2.0 * u2 * gauss[k - 1];
        }
        gauss[k + 1] = acc / (k + 1) as f64;
    }
    (0..=order)
        .map(|k| (0..=k).map(|j| poly[j] * gauss[k - j]).sum())
        .collect()
}

/// The sample potentials used throughout the examples and acceptance tests.
pub mod presets {
    use super::PotentialSpec;

    /// Gaussian-family potentials `(a)`..`(f)`, all with `eta = 1`.
    pub fn gaussian(panel: char) -> Option<PotentialSpec> {
        let coeffs: &[f64] = match panel {
            'a' => &[1.0, 0.0, 0.0, 0.0, 0.0],
            'b' => &[1.0, 0.0, 1.0, 0.0, 0.0],
            'c' => &[0.5, 0.0, 2.156, 0.0, 0.0],
            'd' => &[1.0, -0.138, -1.278, -0.485, 1.473],
            'e' => &[1.0, -0.072, -1.921, -0.260, 1.961],
            'f' => &[-0.197, -0.718, 2.192, 0.0],
            _ => return None,
        };
        PotentialSpec::gaussian_polynomial(coeffs.to_vec(), 1.0).ok()
    }

    /// Square barrier of unit height on `|x| <= 5`.
    pub fn square_barrier() -> PotentialSpec {
        PotentialSpec::Rectangular {
            v0: 1.0,
            half_width: 5.0,
        }
    }

    pub const PANELS: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];
}
