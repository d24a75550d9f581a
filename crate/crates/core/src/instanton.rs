//! Complex-time trajectories through a barrier.
//!
//! The path in the complex time plane is a staircase: real-time segments
//! where `E > V` and imaginary-time segments (`dT = -i ds`) where `E < V`,
//! joined at turning points. On every segment the position stays real.
//! Allowed segments integrate `x' = p/m, p' = -V'(x)`; forbidden segments
//! integrate the inverted-potential motion `x' = p_I/m, p_I' = +V'(x)` with
//! complex momentum `P = i p_I`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{InteractionBounds, PhysicalScales, PotentialSpec};
use crate::semiclassics::{singular_energies, SINGULAR_GUARD};

type C = Complex64;

/// Largest accepted `|E - V(x)|` at a switch point.
pub const SWITCH_TOLERANCE: f64 = 1e-10;
/// Largest distance between the integrated event and the snapped root.
const SNAP_WINDOW: f64 = 1e-6;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Allowed,
    Forbidden,
}

impl Segment {
    pub fn label(&self) -> &'static str {
        match self {
            Segment::Allowed => "allowed",
            Segment::Forbidden => "forbidden",
        }
    }

    fn other(self) -> Self {
        match self {
            Segment::Allowed => Segment::Forbidden,
            Segment::Forbidden => Segment::Allowed,
        }
    }

    /// `dT/ds`.
    fn clock(self) -> C {
        match self {
            Segment::Allowed => C::new(1.0, 0.0),
            Segment::Forbidden => C::new(0.0, -1.0),
        }
    }

    /// Sign of the force in the active momentum equation.
    fn force_sign(self) -> f64 {
        match self {
            Segment::Allowed => -1.0,
            Segment::Forbidden => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchPoint {
    pub s: f64,
    pub x: f64,
    /// `|E - V(x)|` at the switch.
    pub residual: f64,
    /// Segment entered at this point.
    pub entering: Segment,
}

/// Sampled trajectory. Samples are strictly increasing in `s`; the sample
/// at a switch point carries the segment being entered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub energy: f64,
    pub s: Vec<f64>,
    pub time: Vec<C>,
    pub position: Vec<f64>,
    pub momentum: Vec<C>,
    pub segment: Vec<Segment>,
    pub switch_points: Vec<SwitchPoint>,
    pub completed: bool,
    /// Complex time at the crossings of the interaction bounds.
    pub time_at_a: Option<C>,
    pub time_at_b: Option<C>,
}

impl TrajectoryRecord {
    fn new(energy: f64) -> Self {
        TrajectoryRecord {
            energy,
            s: Vec::new(),
            time: Vec::new(),
            position: Vec::new(),
            momentum: Vec::new(),
            segment: Vec::new(),
            switch_points: Vec::new(),
            completed: false,
            time_at_a: None,
            time_at_b: None,
        }
    }

    fn push(&mut self, st: &State) {
        if self.s.last().is_some_and(|&s| s >= st.s) {
            // a zero-length advance only updates the segment label
            if let Some(seg) = self.segment.last_mut() {
                *seg = st.segment;
            }
            if let Some(p) = self.momentum.last_mut() {
                *p = st.momentum();
            }
            return;
        }
        self.s.push(st.s);
        self.time.push(st.time);
        self.position.push(st.x);
        self.momentum.push(st.momentum());
        self.segment.push(st.segment);
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    s: f64,
    time: C,
    x: f64,
    /// Active momentum component: `p` when allowed, `p_I` when forbidden.
    p: f64,
    segment: Segment,
}

impl State {
    fn momentum(&self) -> C {
        match self.segment {
            Segment::Allowed => C::new(self.p, 0.0),
            Segment::Forbidden => C::new(0.0, self.p),
        }
    }
}

struct Dynamics<'a> {
    spec: &'a PotentialSpec,
    mass: f64,
}

impl Dynamics<'_> {
    fn rk4(&self, st: &State, h: f64) -> State {
        let sign = st.segment.force_sign();
        let f = |x: f64, p: f64| (p / self.mass, sign * self.spec.derivative(x));
        let (k1x, k1p) = f(st.x, st.p);
        let (k2x, k2p) = f(st.x + 0.5 * h * k1x, st.p + 0.5 * h * k1p);
        let (k3x, k3p) = f(st.x + 0.5 * h * k2x, st.p + 0.5 * h * k2p);
        let (k4x, k4p) = f(st.x + h * k3x, st.p + h * k3p);
        State {
            s: st.s + h,
            time: st.time + st.segment.clock() * h,
            x: st.x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            p: st.p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            segment: st.segment,
        }
    }

    /// Largest sub-step in `[0, h]` for which `keep` still holds, by bisection.
    fn locate(&self, st: &State, h: f64, keep: impl Fn(&State) -> bool) -> State {
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if keep(&self.rk4(st, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.rk4(st, lo)
    }
}

/// Root of `E - V` within `SNAP_WINDOW` of `x`.
fn snap_turning_point(spec: &PotentialSpec, energy: f64, x: f64) -> Result<f64> {
    let g = |y: f64| energy - spec.value(y);
    let (mut lo, mut hi) = (x - SNAP_WINDOW, x + SNAP_WINDOW);
    let glo = g(lo);
    if glo.signum() == g(hi).signum() {
        return Err(Error::EventDetection { lower: lo, upper: hi });
    }
    for _ in 0..BISECTION_STEPS {
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
    let root = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    if g(root).abs() > SWITCH_TOLERANCE {
        return Err(Error::EventDetection { lower: lo, upper: hi });
    }
    Ok(root)
}

fn check_inputs(
    spec: &PotentialSpec,
    bounds: &InteractionBounds,
    energy: f64,
    x_start: f64,
    s_max: f64,
    step: f64,
) -> Result<()> {
    if !(energy > 0.0) {
        return Err(Error::Precondition(format!(
            "trajectories need a positive energy, got {energy}"
        )));
    }
    if !(step > 0.0 && s_max > 0.0) {
        return Err(Error::Precondition("step and s_max must be positive".into()));
    }
    if x_start > bounds.a {
        return Err(Error::Precondition(format!(
            "x_start = {x_start} must not exceed the left bound {}",
            bounds.a
        )));
    }
    if let Some(&s) = singular_energies(spec, bounds)?
        .iter()
        .find(|&&s| (energy - s).abs() <= SINGULAR_GUARD)
    {
        return Err(Error::SingularEnergy { energy, singular: s });
    }
    // the square barrier's left edge counts as outside
    let v_left = match spec {
        PotentialSpec::Rectangular { v0, half_width } if x_start > -half_width && x_start <= *half_width => *v0,
        PotentialSpec::Rectangular { .. } => 0.0,
        _ => spec.value(x_start),
    };
    if !(energy > v_left) {
        return Err(Error::Precondition(format!(
            "x_start = {x_start} is not in a classically allowed region"
        )));
    }
    Ok(())
}

/// Integrate the staircase trajectory from `x_start` (at or left of `a`)
/// until it passes `b` or `s` reaches `s_max`. The record is returned with
/// `completed = false` in the latter case.
pub fn integrate(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    bounds: &InteractionBounds,
    energy: f64,
    x_start: f64,
    s_max: f64,
    step: f64,
) -> Result<TrajectoryRecord> {
    check_inputs(spec, bounds, energy, x_start, s_max, step)?;
    match spec {
        PotentialSpec::GaussianPolynomial { .. } => {}
        PotentialSpec::Rectangular { v0, half_width } => {
            return Ok(piecewise_constant(
                &[(-half_width, *v0), (*half_width, 0.0)],
                scales.mass,
                bounds,
                energy,
                x_start,
                s_max,
                step,
            ))
        }
        PotentialSpec::Zero => {
            return Ok(piecewise_constant(&[], scales.mass, bounds, energy, x_start, s_max, step))
        }
    }
    let dynamics = Dynamics {
        spec,
        mass: scales.mass,
    };
    let mut record = TrajectoryRecord::new(energy);
    let mut st = State {
        s: 0.0,
        time: C::new(0.0, 0.0),
        x: x_start,
        p: (2.0 * scales.mass * (energy - spec.value(x_start))).sqrt(),
        segment: Segment::Allowed,
    };
    if x_start >= bounds.a {
        record.time_at_a = Some(st.time);
    }
    record.push(&st);
    while st.s < s_max {
        let h = step.min(s_max - st.s);
        let trial = dynamics.rk4(&st, h);
        if record.time_at_a.is_none() && trial.x >= bounds.a {
            st = dynamics.locate(&st, h, |t| t.x < bounds.a);
            record.time_at_a = Some(st.time);
            record.push(&st);
            continue;
        }
        if trial.p < 0.0 {
            st = dynamics.locate(&st, h, |t| t.p >= 0.0);
            let x = snap_turning_point(spec, energy, st.x)?;
            st.x = x;
            st.p = 0.0;
            st.segment = st.segment.other();
            record.switch_points.push(SwitchPoint {
                s: st.s,
                x,
                residual: (energy - spec.value(x)).abs(),
                entering: st.segment,
            });
            record.push(&st);
            continue;
        }
        if trial.x >= bounds.b {
            st = dynamics.locate(&st, h, |t| t.x < bounds.b);
            // the located state sits just inside b; one more sub-step lands on it
            let rest = (bounds.b - st.x) * scales.mass / st.p.max(f64::MIN_POSITIVE);
            st = dynamics.rk4(&st, rest);
            record.time_at_b = Some(st.time);
            record.completed = true;
            record.push(&st);
            break;
        }
        st = trial;
        record.push(&st);
    }
    Ok(record)
}

/// Exact motion through a potential that is constant between the given
/// breakpoints. `steps` lists `(x_k, V on [x_k, x_{k+1}))`; V is zero left
/// of the first breakpoint.
fn piecewise_constant(
    steps: &[(f64, f64)],
    mass: f64,
    bounds: &InteractionBounds,
    energy: f64,
    x_start: f64,
    s_max: f64,
    step: f64,
) -> TrajectoryRecord {
    let mut record = TrajectoryRecord::new(energy);
    let v_start = steps.iter().rev().find(|k| k.0 <= x_start).map_or(0.0, |k| k.1);
    let mut knots: Vec<(f64, f64)> = vec![(x_start, v_start)];
    knots.extend(steps.iter().copied().filter(|&(x, _)| x > x_start && x < bounds.b));
    let mut st = State {
        s: 0.0,
        time: C::new(0.0, 0.0),
        x: x_start,
        p: (2.0 * mass * energy).sqrt(),
        segment: Segment::Allowed,
    };
    if x_start >= bounds.a {
        record.time_at_a = Some(st.time);
    }
    for (k, &(x0, v)) in knots.iter().enumerate() {
        let x1 = knots.get(k + 1).map_or(bounds.b, |n| n.0);
        let segment = if energy > v { Segment::Allowed } else { Segment::Forbidden };
        if segment != st.segment {
            record.switch_points.push(SwitchPoint {
                s: st.s,
                x: x0,
                residual: (energy - v).abs(),
                entering: segment,
            });
        }
        st.segment = segment;
        st.x = x0;
        st.p = (2.0 * mass * (energy - v).abs()).sqrt();
        let speed = st.p / mass;
        // sample the straight-line motion, with a sample at the crossing of a
        let mut marks: Vec<f64> = Vec::new();
        if bounds.a > x0 && bounds.a < x1 {
            marks.push(bounds.a);
        }
        marks.push(x1);
        let (s_seg, t_seg) = (st.s, st.time);
        let mut x_prev = x0;
        for mark in marks {
            let n = (((mark - x_prev) / speed / step).ceil() as usize).max(1);
            for i in 0..=n {
                let x = x_prev + (mark - x_prev) * i as f64 / n as f64;
                let ds = (x - x0) / speed;
                let next = State {
                    s: s_seg + ds,
                    time: t_seg + segment.clock() * ds,
                    x,
                    ..st
                };
                if next.s > s_max {
                    return record;
                }
                st = next;
                record.push(&st);
            }
            if mark == bounds.a {
                record.time_at_a = Some(st.time);
            }
            x_prev = mark;
        }
    }
    if st.segment == Segment::Forbidden {
        // leaving through an edge that coincides with b
        st.segment = Segment::Allowed;
        st.p = (2.0 * mass * energy).sqrt();
        record.switch_points.push(SwitchPoint {
            s: st.s,
            x: st.x,
            residual: energy,
            entering: Segment::Allowed,
        });
        record.push(&st);
    }
    record.time_at_b = Some(st.time);
    record.completed = true;
    record
}

/// `(t+, t-)` between the crossings of `a` and `b`: `T_b - T_a = t+ - i t-`.
pub fn accumulated_times(record: &TrajectoryRecord) -> Result<(f64, f64)> {
    match (record.completed, record.time_at_a, record.time_at_b) {
        (true, Some(ta), Some(tb)) => {
            let dt = tb - ta;
            Ok((dt.re, -dt.im))
        }
        _ => Err(Error::IncompleteTrajectory {
            s_max: record.s.last().copied().unwrap_or(0.0),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentConservation {
    pub index: usize,
    pub segment: Segment,
    pub s_start: f64,
    pub s_end: f64,
    /// Largest `|P^2/2m + V(x) - E|` over the segment's samples.
    pub max_drift: f64,
}

/// Energy drift per segment. For the square barrier the conserved quantity
/// uses the constant value on each side of the edge.
pub fn conservation_report(
    spec: &PotentialSpec,
    scales: &PhysicalScales,
    record: &TrajectoryRecord,
) -> Vec<SegmentConservation> {
    let mut out: Vec<SegmentConservation> = Vec::new();
    for i in 0..record.len() {
        let seg = record.segment[i];
        let p = record.momentum[i];
        let kinetic = (p * p).re / (2.0 * scales.mass);
        let x = record.position[i];
        let v = match spec {
            // edges belong to the segment on their far side
            PotentialSpec::Rectangular { v0, half_width } => {
                if (x.abs() < *half_width) || (x.abs() == *half_width && (seg == Segment::Forbidden) == (*v0 > record.energy)) {
                    *v0
                } else {
                    0.0
                }
            }
            _ => spec.value(x),
        };
        let drift = (kinetic + v - record.energy).abs();
        let starts_new = i == 0 || record.segment[i - 1] != seg;
        if starts_new {
            out.push(SegmentConservation {
                index: out.len(),
                segment: seg,
                s_start: record.s[i],
                s_end: record.s[i],
                max_drift: drift,
            });
        } else if let Some(last) = out.last_mut() {
            last.s_end = record.s[i];
            last.max_drift = last.max_drift.max(drift);
        }
    }
    out
}
