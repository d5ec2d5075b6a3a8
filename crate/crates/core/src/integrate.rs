//! Adaptive Dormand–Prince 5(4) integration of the first-order system with
//! projection back onto the constraints after every step, plus detection of
//! approaching singularities.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::dynamics::{self, pair_gap, SystemState, SINGULAR_TOL};
use crate::error::{Error, Result};
use crate::geometry::{project_point, project_velocity, Curvature, Vec3};
use crate::par::Execution;
use crate::singularities::{classify, most_severe, SingularityClassification};

/// Steps shorter than this end the run.
pub const MIN_DT: f64 = 1e-14;

/// Resolution of the event-time bisection.
pub const EVENT_TIME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_dt: f64,
    pub max_dt: f64,
    /// The run stops once `min over pairs of |σ − σK²|` drops below this.
    pub singularity_event_threshold: f64,
    pub max_steps: usize,
    /// Record samples on this time grid instead of after every step.
    pub sample_interval: Option<f64>,
    /// Pairs within `event_margin × threshold` of the singular set are
    /// included in the classification of an event.
    pub event_margin: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            initial_dt: 1e-3,
            max_dt: 0.1,
            singularity_event_threshold: 1e-8,
            max_steps: 10_000_000,
            sample_interval: None,
            event_margin: 100.0,
            execution: Execution::default(),
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("initial_dt", self.initial_dt),
            ("max_dt", self.max_dt),
            ("singularity_event_threshold", self.singularity_event_threshold),
            ("event_margin", self.event_margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.singularity_event_threshold <= SINGULAR_TOL {
            return Err(Error::Domain(format!(
                "event threshold {} must exceed the hard singularity tolerance {SINGULAR_TOL}",
                self.singularity_event_threshold
            )));
        }
        if let Some(s) = self.sample_interval {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("sample interval must be positive, got {s}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: SystemState,
    pub diagnostics: DiagnosticsRecord,
}

impl TrajectorySample {
    pub fn new(state: SystemState) -> Self {
        Self {
            time: state.time(),
            diagnostics: diagnostics::record(&state),
            state,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StopReason {
    ReachedTEnd,
    SingularityEvent {
        time: f64,
        /// The most severe pair, collision-antipodal first.
        primary: SingularityClassification,
        classification: Vec<SingularityClassification>,
    },
    StepUnderflow {
        time: f64,
        dt: f64,
    },
    MaxSteps {
        time: f64,
    },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::ReachedTEnd => "reached_t_end",
            StopReason::SingularityEvent { primary, .. } => primary.kind.as_str(),
            StopReason::StepUnderflow { .. } => "step_underflow",
            StopReason::MaxSteps { .. } => "max_steps",
        }
    }

    pub fn is_singularity(&self) -> bool {
        matches!(self, StopReason::SingularityEvent { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub samples: Vec<TrajectorySample>,
    pub stop: StopReason,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Integration {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("a run always records its start")
    }
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step of `y' = f(t, y)`. Returns the fifth-order
/// solution and the embedded error vector.
pub fn dopri_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        for (idx, v) in tmp.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (r, a) in A[s].iter().enumerate().take(s) {
                acc += a * k[r][idx];
            }
            *v = y[idx] + h * acc;
        }
        let (_, rest) = k.split_at_mut(s);
        f(t + C[s] * h, &tmp, &mut rest[0])?;
    }
    let mut out = y.to_vec();
    let mut err = vec![0.0; n];
    for idx in 0..n {
        let mut hi = 0.0;
        let mut e = 0.0;
        for s in 0..7 {
            hi += B[s] * k[s][idx];
            e += E[s] * k[s][idx];
        }
        out[idx] += h * hi;
        err[idx] = h * e;
    }
    Ok((out, err))
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], rel: f64, abs: f64) -> f64 {
    let sum: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = abs + rel * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / y0.len().max(1) as f64).sqrt()
}

/// Packs positions then momenta into one flat vector.
pub fn pack(state: &SystemState) -> Vec<f64> {
    let mut y = Vec::with_capacity(6 * state.len());
    for b in state.bodies() {
        y.extend_from_slice(&b.q().to_array());
    }
    for b in state.bodies() {
        y.extend_from_slice(&b.p().to_array());
    }
    y
}

fn unpack(y: &[f64]) -> (Vec<Vec3>, Vec<Vec3>) {
    let n = y.len() / 6;
    let v = |i: usize| Vec3::new(y[3 * i], y[3 * i + 1], y[3 * i + 2]);
    ((0..n).map(v).collect(), (n..2 * n).map(v).collect())
}

/// The flat right-hand side used by the stepper.
fn system_rhs(
    k: Curvature,
    masses: &[f64],
    exec: Execution,
) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
    move |_t, y, out| {
        let (q, p) = unpack(y);
        let n = q.len();
        let mut qd = vec![Vec3::ZERO; n];
        let mut pd = vec![Vec3::ZERO; n];
        dynamics::rhs_into(k, masses, &q, &p, &mut qd, &mut pd, exec)?;
        for i in 0..n {
            out[3 * i..3 * i + 3].copy_from_slice(&qd[i].to_array());
            out[3 * (n + i)..3 * (n + i) + 3].copy_from_slice(&pd[i].to_array());
        }
        Ok(())
    }
}

/// Re-projects positions onto the surface and momenta onto the tangent
/// planes.
fn project(k: Curvature, masses: &[f64], y: &[f64], time: f64) -> Result<SystemState> {
    let (q, p) = unpack(y);
    let mut qs = Vec::with_capacity(q.len());
    let mut ps = Vec::with_capacity(q.len());
    for (qi, pi) in q.into_iter().zip(p) {
        let sp = project_point(k, qi)?;
        ps.push(project_velocity(k, &sp, pi).v());
        qs.push(sp.v());
    }
    Ok(SystemState::from_raw_parts(k, masses, &qs, &ps, time))
}

/// Smallest pair gap `|σ − σK²|` of a configuration.
pub fn event_function(k: Curvature, q: &[Vec3]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            g = g.min(pair_gap(k, q[i], q[j]).abs());
        }
    }
    g
}

fn state_gap(state: &SystemState) -> f64 {
    event_function(state.curvature(), &state.positions())
}

fn raw_step(state: &SystemState, dt: f64, exec: Execution) -> Result<(SystemState, Vec<f64>)> {
    let k = state.curvature();
    let masses = state.masses();
    let f = system_rhs(k, &masses, exec);
    let y = pack(state);
    let (y1, err) = dopri_step(&f, state.time(), &y, dt)?;
    Ok((project(k, &masses, &y1, state.time() + dt)?, err))
}

/// One unconditional step of size `dt` followed by projection. The second
/// value is the largest component of the embedded error estimate.
pub fn step(state: &SystemState, dt: f64, config: &IntegratorConfig) -> Result<(SystemState, f64)> {
    if dt == 0.0 {
        return Ok((state.clone(), 0.0));
    }
    let (s, err) = raw_step(state, dt, config.execution)?;
    Ok((s, err.iter().fold(0.0f64, |m, e| m.max(e.abs()))))
}

/// `n` fixed steps of size `dt`, returning every intermediate state.
pub fn integrate_fixed(
    state: &SystemState,
    dt: f64,
    n: usize,
    config: &IntegratorConfig,
) -> Result<Vec<SystemState>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(state.clone());
    for _ in 0..n {
        let (s, _) = step(out.last().unwrap(), dt, config)?;
        out.push(s);
    }
    Ok(out)
}

/// Adaptive integration from `state.time()` to `t_end`.
///
/// `observer` sees every recorded sample as it is produced. The run stops
/// early when two bodies come within the event threshold of a singular
/// configuration; the crossing time is then refined by bisection.
pub fn integrate<O>(
    state: &SystemState,
    t_end: f64,
    config: &IntegratorConfig,
    mut observer: O,
) -> Result<Integration>
where
    O: FnMut(&TrajectorySample),
{
    let mut samples = Vec::new();
    let mut record = |s: &SystemState, samples: &mut Vec<TrajectorySample>| {
        let sample = TrajectorySample::new(s.clone());
        observer(&sample);
        samples.push(sample);
    };

    let done = |samples: Vec<TrajectorySample>, stop, acc, rej| Integration {
        samples,
        stop,
        accepted_steps: acc,
        rejected_steps: rej,
    };

    config.validate()?;
    record(state, &mut samples);
    let threshold = config.singularity_event_threshold;
    if state_gap(state) < threshold {
        return Ok(done(samples, singular_stop(state, config), 0, 0));
    }
    if !(t_end > state.time()) {
        return Ok(done(samples, StopReason::ReachedTEnd, 0, 0));
    }

    let k = state.curvature();
    let masses = state.masses();
    let f = system_rhs(k, &masses, config.execution);
    let mut cur = state.clone();
    let mut y = pack(&cur);
    let mut h = config.initial_dt.min(config.max_dt);
    let mut next_sample = config.sample_interval.map(|s| state.time() + s);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    loop {
        let t = cur.time();
        let target = next_sample.map_or(t_end, |s| s.min(t_end));
        let mut dt = h.min(target - t);
        let clipped = dt < h;
        if accepted + rejected >= config.max_steps {
            return Ok(done(samples, StopReason::MaxSteps { time: t }, accepted, rejected));
        }
        if dt < MIN_DT && target - t >= MIN_DT {
            return Ok(done(samples, StopReason::StepUnderflow { time: t, dt }, accepted, rejected));
        }
        if dt < MIN_DT {
            // the remaining gap to a grid point is below resolution
            dt = target - t;
        }

        let attempt = dopri_step(&f, t, &y, dt).map(|(y1, err)| {
            let en = error_norm(&y, &y1, &err, config.rel_tol, config.abs_tol);
            (y1, en)
        });
        let (y1, en) = match attempt {
            Ok(v) if v.1.is_finite() => v,
            _ => {
                rejected += 1;
                h = dt * 0.25;
                continue;
            }
        };
        if en > 1.0 {
            rejected += 1;
            h = dt * (0.9 * en.powf(-0.2)).max(0.2);
            continue;
        }
        let t1 = if (target - (t + dt)).abs() <= MIN_DT { target } else { t + dt };
        let next = match project(k, &masses, &y1, t1) {
            Ok(s) => s,
            Err(_) => {
                rejected += 1;
                h = dt * 0.25;
                continue;
            }
        };
        accepted += 1;

        if state_gap(&next) < threshold {
            let ev = refine_event(&cur, dt, threshold, config.execution);
            record(&ev, &mut samples);
            return Ok(done(samples, singular_stop(&ev, config), accepted, rejected));
        }

        let grow = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        let proposed = (dt * grow).min(config.max_dt);
        // do not let a short step onto a sample time shrink the next one
        h = if clipped { proposed.max(h) } else { proposed };

        cur = next;
        y = pack(&cur);
        let at_sample = next_sample.is_some_and(|s| t1 >= s);
        if config.sample_interval.is_none() || at_sample || t1 >= t_end {
            record(&cur, &mut samples);
        }
        if at_sample {
            let s = config.sample_interval.unwrap();
            let mut ns = next_sample.unwrap();
            while ns <= t1 {
                ns += s;
            }
            next_sample = Some(ns);
        }
        if t1 >= t_end {
            return Ok(done(samples, StopReason::ReachedTEnd, accepted, rejected));
        }
    }
}

/// Bisects the accepted step `[0, dt]` from `from` for the first time the
/// pair gap falls below `threshold`, and returns the state there.
fn refine_event(from: &SystemState, dt: f64, threshold: f64, exec: Execution) -> SystemState {
    let (mut lo, mut hi) = (0.0, dt);
    let mut best = None;
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        match raw_step(from, mid, exec) {
            Ok((s, _)) if state_gap(&s) >= threshold => lo = mid,
            Ok((s, _)) => {
                hi = mid;
                best = Some(s);
            }
            Err(_) => hi = mid,
        }
    }
    best.or_else(|| raw_step(from, hi, exec).ok().map(|r| r.0))
        .unwrap_or_else(|| from.clone())
}

fn singular_stop(state: &SystemState, config: &IntegratorConfig) -> StopReason {
    let list = classify(state, config.singularity_event_threshold * config.event_margin);
    let primary = most_severe(&list).unwrap_or_else(|| {
        // the gap is below threshold, so at least one pair qualifies; keep a
        // defensive fallback for NaN positions
        SingularityClassification {
            pair: (0, 0),
            kind: crate::singularities::SingularityKind::Collision,
            proximity: state_gap(state),
        }
    });
    StopReason::SingularityEvent {
        time: state.time(),
        primary,
        classification: list,
    }
}

/// Integrates a general ODE `y' = f(t, y)` with the same adaptive scheme,
/// without projection or events. Returns `(t, y)` at every accepted step.
pub fn integrate_ode<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    config.validate()?;
    let mut out = vec![(t0, y0.to_vec())];
    let (mut t, mut y) = (t0, y0.to_vec());
    let mut h = config.initial_dt.min(config.max_dt);
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > config.max_steps {
            return Err(Error::Precondition(format!("max_steps reached at t = {t}")));
        }
        let dt = h.min(t_end - t);
        if dt < MIN_DT {
            return Err(Error::Precondition(format!("step underflow at t = {t}")));
        }
        let (y1, en) = match dopri_step(&f, t, &y, dt) {
            Ok((y1, err)) => {
                let en = error_norm(&y, &y1, &err, config.rel_tol, config.abs_tol);
                (y1, en)
            }
            Err(_) => {
                h = dt * 0.25;
                continue;
            }
        };
        if !(en <= 1.0) {
            h = dt * if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.25 };
            continue;
        }
        t = if (t_end - (t + dt)).abs() <= MIN_DT { t_end } else { t + dt };
        y = y1;
        out.push((t, y.clone()));
        let grow = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h = (dt * grow).min(config.max_dt);
    }
    Ok(out)
}

/// Largest drifts of the first integrals along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    /// Relative to `|h(0)|`, or absolute when that is below 1e-12.
    pub energy: f64,
    /// Largest component change, relative to `|c(0)|` or absolute when
    /// that is below 1e-12.
    pub angular_momentum: f64,
    pub constraint_residual: f64,
}

pub fn invariant_drift(samples: &[TrajectorySample]) -> InvariantDrift {
    let Some(first) = samples.first() else {
        return InvariantDrift {
            energy: 0.0,
            angular_momentum: 0.0,
            constraint_residual: 0.0,
        };
    };
    let h0 = first.diagnostics.energy;
    let c0 = first.diagnostics.angular_momentum;
    let escale = if h0.abs() < 1e-12 { 1.0 } else { h0.abs() };
    let cscale = if c0.norm() < 1e-12 { 1.0 } else { c0.norm() };
    let mut d = InvariantDrift {
        energy: 0.0,
        angular_momentum: 0.0,
        constraint_residual: 0.0,
    };
    for s in samples {
        d.energy = d.energy.max((s.diagnostics.energy - h0).abs() / escale);
        d.angular_momentum = d
            .angular_momentum
            .max((s.diagnostics.angular_momentum - c0).max_abs() / cscale);
        d.constraint_residual = d.constraint_residual.max(s.diagnostics.constraint_residual);
    }
    d
}
