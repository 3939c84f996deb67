//! Time integration of the mode equations and switching detection.

use alloc::vec;
use alloc::vec::Vec;

use crate::arch::{energies_of, Energies, LoadProgram, NondimArch, StateVector};
use crate::error::{Error, Result};
use crate::ode::{integrate, Control, OdeSystem, Options, Stats, StepView};
use crate::roots::brent;
use crate::statics::CriticalPoint;

/// Which form of the mode equations to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `0.5 A'' + c A' + f(A) + F p / 4 = 0`.
    SecondOrder,
    /// `c A' + f(A) + F p / 4 = 0`.
    Overdamped,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Self::SecondOrder => "second-order",
            Self::Overdamped => "overdamped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "second-order" => Some(Self::SecondOrder),
            "overdamped" => Some(Self::Overdamped),
            _ => None,
        }
    }
}

/// Level of the normal-form coordinate `2 V1 . (A - A_c)` that marks switching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Fraction of the way from the fold to the far equilibrium carrying `F_c`.
    RemoteFraction(f64),
    /// Absolute coordinate value.
    Coordinate(f64),
}

impl Threshold {
    /// Default per model: halfway for the first-order flow, which only
    /// approaches the far state asymptotically, and the far state itself
    /// for the second-order equations.
    pub fn default_for(model: Model) -> Self {
        match model {
            Model::Overdamped => Self::RemoteFraction(0.5),
            Model::SecondOrder => Self::RemoteFraction(1.0),
        }
    }

    pub fn level(&self, cp: &CriticalPoint) -> Result<f64> {
        let level = match *self {
            Self::RemoteFraction(theta) => {
                let remote = cp
                    .remote
                    .as_ref()
                    .ok_or(Error::InvalidInput("critical point has no far branch"))?;
                theta * remote.coordinate
            }
            Self::Coordinate(v) => v,
        };
        if level.is_finite() && level > 0.0 {
            Ok(level)
        } else {
            Err(Error::InvalidInput("switching threshold must be positive"))
        }
    }
}

/// Starting state of a simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialCondition {
    /// Critical state at rest for static loads, as-fabricated shape at rest for ramps.
    #[default]
    Protocol,
    State(StateVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub model: Model,
    pub rtol: f64,
    pub atol: f64,
    pub max_time: f64,
    /// Switching level; the per-model default when `None`.
    pub threshold: Option<Threshold>,
    /// Further levels whose first crossings are recorded as well.
    pub extra_thresholds: Vec<Threshold>,
    /// Stop once every level has been crossed; fail if the main one never is.
    pub stop_at_switch: bool,
    pub initial: InitialCondition,
    /// Keep every n-th accepted step (zero keeps only end points and crossings).
    pub record_every: usize,
    /// Samples are thinned by half whenever this many are held.
    pub max_samples: usize,
    pub max_steps: usize,
    pub h_max: f64,
}

impl SimulationConfig {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            rtol: 1e-12,
            atol: 1e-12,
            max_time: 1e7,
            threshold: None,
            extra_thresholds: Vec::new(),
            stop_at_switch: true,
            initial: InitialCondition::Protocol,
            record_every: 1,
            max_samples: 200_000,
            max_steps: 100_000_000,
            h_max: f64::INFINITY,
        }
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold.unwrap_or(Threshold::default_for(self.model))
    }

    pub fn validate(&self) -> Result<()> {
        let tol_ok = |t: f64| t > 0.0 && t <= 1e-3;
        if !(tol_ok(self.rtol) && tol_ok(self.atol)) {
            return Err(Error::InvalidInput("tolerances must lie in (0, 1e-3]"));
        }
        if !(self.max_time > 0.0) {
            return Err(Error::InvalidInput("max time must be positive"));
        }
        if self.max_samples < 4 {
            return Err(Error::InvalidInput("max samples must be at least 4"));
        }
        Ok(())
    }

    fn options(&self) -> Options {
        Options {
            rtol: self.rtol,
            atol: self.atol,
            h_max: self.h_max,
            h_init: 0.0,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    pub force: f64,
    pub delta: f64,
    /// Normal-form coordinate `2 V1 . (A - A_c)`.
    pub coordinate: f64,
    pub energies: Energies,
}

/// First upward passage of the normal-form coordinate through `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub level: f64,
    pub tau: f64,
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    pub force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub model: Model,
    pub samples: Vec<Sample>,
    pub crossings: Vec<Crossing>,
    pub stats: Stats,
}

impl TimeSeries {
    /// Largest deviation of the total energy from its initial value, relative
    /// to the larger of that value and the peak kinetic energy.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let e0 = first.energies.total;
        let peak = self
            .samples
            .iter()
            .fold(0.0f64, |m, s| m.max(s.energies.kinetic));
        let scale = libm::fabs(e0).max(peak);
        let dev = self
            .samples
            .iter()
            .fold(0.0f64, |m, s| m.max(libm::fabs(s.energies.total - e0)));
        if scale > 0.0 {
            dev / scale
        } else {
            dev
        }
    }
}

/// Numerically detected switching.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingEvent {
    pub tau_switch: f64,
    pub f_switch: f64,
    /// Tipping state.
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    pub level: f64,
}

struct SecondOrderSystem<'a> {
    arch: &'a NondimArch,
    load: LoadProgram,
    fc: f64,
}

impl OdeSystem for SecondOrderSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.arch.len()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.arch.len();
        let force = self.load.force(t, self.fc);
        let c = self.arch.damping();
        let p = self.arch.load_pattern();
        let (dw, dv) = dy.split_at_mut(n);
        self.arch.internal_force_into(&y[..n], dv);
        for i in 0..n {
            dw[i] = y[n + i];
            dv[i] = -2.0 * c * y[n + i] - 2.0 * dv[i] - 0.5 * force * p[i];
        }
    }
}

struct OverdampedSystem<'a> {
    arch: &'a NondimArch,
    load: LoadProgram,
    fc: f64,
}

impl OdeSystem for OverdampedSystem<'_> {
    fn dim(&self) -> usize {
        self.arch.len()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let force = self.load.force(t, self.fc);
        let c = self.arch.damping();
        let p = self.arch.load_pattern();
        self.arch.internal_force_into(y, dy);
        for i in 0..dy.len() {
            dy[i] = -(dy[i] + 0.25 * force * p[i]) / c;
        }
    }
}

fn initial_state(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
) -> Result<StateVector> {
    let state = match &cfg.initial {
        InitialCondition::State(s) => s.clone(),
        InitialCondition::Protocol => match load {
            LoadProgram::Static { .. } => StateVector {
                tau: 0.0,
                weights: cp.weights.clone(),
                rates: vec![0.0; arch.len()],
            },
            LoadProgram::Ramp { .. } => StateVector::at_rest(arch),
        },
    };
    arch.check_len(&state.weights)?;
    arch.check_len(&state.rates)?;
    Ok(state)
}

/// Integrates the second-order mode equations.
pub fn integrate_full(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
) -> Result<TimeSeries> {
    cfg.validate()?;
    arch.check_len(&cp.weights)?;
    let s0 = initial_state(arch, cp, load, cfg)?;
    let sys = SecondOrderSystem {
        arch,
        load: *load,
        fc: cp.force,
    };
    let mut y0 = s0.weights.clone();
    y0.extend_from_slice(&s0.rates);
    run(&sys, Model::SecondOrder, arch, cp, load, cfg, s0.tau, &y0)
}

/// Integrates the first-order (damping-dominated) mode equations.
pub fn integrate_overdamped(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
) -> Result<TimeSeries> {
    cfg.validate()?;
    arch.check_len(&cp.weights)?;
    if !(arch.damping() > 0.0) {
        return Err(Error::InvalidInput(
            "overdamped model needs positive damping",
        ));
    }
    let s0 = initial_state(arch, cp, load, cfg)?;
    let sys = OverdampedSystem {
        arch,
        load: *load,
        fc: cp.force,
    };
    run(
        &sys,
        Model::Overdamped,
        arch,
        cp,
        load,
        cfg,
        s0.tau,
        &s0.weights,
    )
}

/// Integrates the model selected in `cfg`.
pub fn simulate(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
) -> Result<TimeSeries> {
    match cfg.model {
        Model::SecondOrder => integrate_full(arch, cp, load, cfg),
        Model::Overdamped => integrate_overdamped(arch, cp, load, cfg),
    }
}

/// Simulates and returns the switching event for the configured threshold.
pub fn simulate_switching(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
) -> Result<SwitchingEvent> {
    let ts = simulate(arch, cp, load, cfg)?;
    detect_switching(&ts, cp, cfg)
}

struct Recorder<'a> {
    arch: &'a NondimArch,
    cp: &'a CriticalPoint,
    load: &'a LoadProgram,
    model: Model,
    every: usize,
    max_samples: usize,
    counter: usize,
    samples: Vec<Sample>,
}

impl Recorder<'_> {
    fn split<'v>(&self, y: &'v [f64], dy: &'v [f64]) -> (&'v [f64], &'v [f64]) {
        let n = self.arch.len();
        match self.model {
            Model::SecondOrder => (&y[..n], &y[n..]),
            Model::Overdamped => (y, dy),
        }
    }

    fn make(&self, tau: f64, y: &[f64], dy: &[f64]) -> Sample {
        let (w, r) = self.split(y, dy);
        let force = self.load.force(tau, self.cp.force);
        Sample {
            tau,
            weights: w.to_vec(),
            rates: r.to_vec(),
            force,
            delta: self.arch.midpoint_displacement(w),
            coordinate: self.cp.switching_coordinate(w),
            energies: energies_of(self.arch, w, r, force),
        }
    }

    fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
        if self.samples.len() >= self.max_samples {
            let mut k = 0;
            self.samples.retain(|_| {
                k += 1;
                k % 2 == 1
            });
            self.every = self.every.max(1) * 2;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run<S: OdeSystem>(
    sys: &S,
    model: Model,
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    cfg: &SimulationConfig,
    t0: f64,
    y0: &[f64],
) -> Result<TimeSeries> {
    let n = arch.len();
    let main_level = cfg.threshold().level(cp)?;
    let mut levels = vec![main_level];
    for t in &cfg.extra_thresholds {
        levels.push(t.level(cp)?);
    }
    let mut crossed: Vec<Option<Crossing>> = vec![None; levels.len()];
    let mut rec = Recorder {
        arch,
        cp,
        load,
        model,
        every: cfg.record_every,
        max_samples: cfg.max_samples,
        counter: 0,
        samples: Vec::new(),
    };
    let mut dy0 = vec![0.0; y0.len()];
    sys.rhs(t0, y0, &mut dy0);
    rec.push(rec.make(t0, y0, &dy0));
    let sigma0 = cp.switching_coordinate(&y0[..n]);
    for (slot, level) in crossed.iter_mut().zip(&levels) {
        if sigma0 >= *level {
            let (w, r) = rec.split(y0, &dy0);
            *slot = Some(Crossing {
                level: *level,
                tau: t0,
                weights: w.to_vec(),
                rates: r.to_vec(),
                force: load.force(t0, cp.force),
            });
        }
    }
    let all_crossed_at_start = cfg.stop_at_switch && crossed.iter().all(Option::is_some);
    let mut last_tau = t0;
    let mut failure = None;
    let mut buf = vec![0.0; y0.len()];
    let mut dbuf = vec![0.0; y0.len()];
    let observer = |view: &mut StepView<'_, S>| -> Control {
        let t = view.t();
        last_tau = t;
        if view.y().iter().any(|v| !v.is_finite()) {
            failure = Some(Error::NonFinite(t));
            return Control::Stop;
        }
        let sigma_old = cp.switching_coordinate(&view.y_old()[..n]);
        let sigma_new = cp.switching_coordinate(&view.y()[..n]);
        for (slot, level) in crossed.iter_mut().zip(&levels) {
            if slot.is_some() || sigma_new < *level {
                continue;
            }
            let (ta, tb) = (view.t_old(), t);
            let tc = if sigma_old >= *level {
                ta
            } else {
                brent(
                    |s| {
                        view.interpolate(s, &mut buf);
                        cp.switching_coordinate(&buf[..n]) - level
                    },
                    ta,
                    tb,
                    4.0 * f64::EPSILON * libm::fabs(tb).max(1.0),
                    200,
                )
                .unwrap_or(tb)
            };
            view.interpolate(tc, &mut buf);
            sys.rhs(tc, &buf, &mut dbuf);
            let (w, r) = rec.split(&buf, &dbuf);
            *slot = Some(Crossing {
                level: *level,
                tau: tc,
                weights: w.to_vec(),
                rates: r.to_vec(),
                force: load.force(tc, cp.force),
            });
        }
        rec.counter += 1;
        if rec.every > 0 && rec.counter % rec.every == 0 {
            let s = rec.make(t, view.y(), view.dy());
            rec.push(s);
        }
        if cfg.stop_at_switch && crossed.iter().all(Option::is_some) {
            let s = rec.make(t, view.y(), view.dy());
            if rec.samples.last().map(|l| l.tau) != Some(t) {
                rec.push(s);
            }
            return Control::Stop;
        }
        Control::Continue
    };
    let outcome = if all_crossed_at_start {
        None
    } else {
        Some(integrate(
            sys,
            t0,
            y0,
            t0 + cfg.max_time,
            &cfg.options(),
            observer,
        )?)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let stats = outcome.as_ref().map(|o| o.stats).unwrap_or_default();
    if let Some(o) = &outcome {
        if rec.samples.last().map(|l| l.tau) != Some(o.t) {
            let mut dy = vec![0.0; o.y.len()];
            sys.rhs(o.t, &o.y, &mut dy);
            let s = rec.make(o.t, &o.y, &dy);
            rec.samples.push(s);
        }
    }
    if cfg.stop_at_switch && crossed[0].is_none() {
        return Err(Error::MaxTimeExceeded(last_tau));
    }
    Ok(TimeSeries {
        model,
        samples: rec.samples,
        crossings: crossed.into_iter().flatten().collect(),
        stats,
    })
}

/// Switching event for the threshold configured in `cfg`, taken from the
/// crossings located during integration or, failing that, interpolated
/// between recorded samples.
pub fn detect_switching(
    ts: &TimeSeries,
    cp: &CriticalPoint,
    cfg: &SimulationConfig,
) -> Result<SwitchingEvent> {
    let level = cfg.threshold().level(cp)?;
    let tol = 1e-12 * level.max(1.0);
    if let Some(c) = ts
        .crossings
        .iter()
        .find(|c| libm::fabs(c.level - level) <= tol)
    {
        return Ok(SwitchingEvent {
            tau_switch: c.tau,
            f_switch: c.force,
            weights: c.weights.clone(),
            rates: c.rates.clone(),
            level,
        });
    }
    let s = &ts.samples;
    let k = s
        .iter()
        .position(|x| x.coordinate >= level)
        .ok_or(Error::NoSwitching)?;
    if k == 0 {
        let x = &s[0];
        return Ok(SwitchingEvent {
            tau_switch: x.tau,
            f_switch: x.force,
            weights: x.weights.clone(),
            rates: x.rates.clone(),
            level,
        });
    }
    let (a, b) = (&s[k - 1], &s[k]);
    let t = (level - a.coordinate) / (b.coordinate - a.coordinate);
    let lerp = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(u, v)| u + t * (v - u))
            .collect::<Vec<f64>>()
    };
    Ok(SwitchingEvent {
        tau_switch: a.tau + t * (b.tau - a.tau),
        f_switch: a.force + t * (b.force - a.force),
        weights: lerp(&a.weights, &b.weights),
        rates: lerp(&a.rates, &b.rates),
        level,
    })
}

/// True when the damping is large enough for the first-order model:
/// `c^2 >= 100 sqrt(K eps)`, with `eps` the load offset at switching.
pub fn inertia_negligible(arch: &NondimArch, cp: &CriticalPoint, load: &LoadProgram) -> bool {
    let c = arch.damping();
    let eps = match *load {
        LoadProgram::Static { epsilon } => cp.load_gain * epsilon,
        LoadProgram::Ramp { nu, .. } => {
            let gamma = 2.0 * c;
            match crate::analytic::ramp_damped_delay(cp.curvature, cp.load_gain * nu, gamma) {
                Ok(d) => cp.load_gain * nu * d,
                Err(_) => return false,
            }
        }
    };
    c * c >= 100.0 * libm::sqrt(cp.curvature * eps)
}

/// Forcing of the scalar normal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedForcing {
    Static {
        epsilon: f64,
    },
    /// Ramp `nu * taubar`, started on the slowly varying branch at `start < 0`.
    Ramp {
        nu: f64,
        start: f64,
    },
}

/// Scalar normal form `m dbar'' + gamma dbar' = forcing + K dbar^2` with
/// `m = 1` when inertial and `m = 0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProblem {
    pub curvature: f64,
    pub damping: f64,
    pub inertial: bool,
    pub forcing: ReducedForcing,
}

impl ReducedProblem {
    /// Intrinsic time scale of the ramp problem.
    pub fn ramp_time_scale(curvature: f64, nu: f64, damping: f64, inertial: bool) -> f64 {
        if inertial && damping == 0.0 {
            libm::pow(curvature * nu, -0.2)
        } else {
            libm::cbrt(damping * damping / (curvature * nu))
        }
    }
}

struct ReducedSystem {
    k: f64,
    gamma: f64,
    inertial: bool,
    forcing: ReducedForcing,
}

impl ReducedSystem {
    fn drive(&self, t: f64) -> f64 {
        match self.forcing {
            ReducedForcing::Static { epsilon } => epsilon,
            ReducedForcing::Ramp { nu, .. } => nu * t,
        }
    }
}

impl OdeSystem for ReducedSystem {
    fn dim(&self) -> usize {
        if self.inertial {
            2
        } else {
            1
        }
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let g = self.drive(t) + self.k * y[0] * y[0];
        if self.inertial {
            dy[0] = y[1];
            dy[1] = g - self.gamma * y[1];
        } else {
            dy[0] = g / self.gamma;
        }
    }
}

/// First times at which the normal-form coordinate reaches each of `levels`.
pub fn integrate_reduced(
    problem: &ReducedProblem,
    levels: &[f64],
    opts: &Options,
    max_time: f64,
) -> Result<Vec<f64>> {
    let k = problem.curvature;
    if !(k > 0.0) || !(problem.damping >= 0.0) || (!problem.inertial && !(problem.damping > 0.0)) {
        return Err(Error::InvalidInput(
            "reduced problem needs K > 0 and admissible damping",
        ));
    }
    if levels.is_empty() || levels.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidInput("levels must be positive"));
    }
    let sys = ReducedSystem {
        k,
        gamma: problem.damping,
        inertial: problem.inertial,
        forcing: problem.forcing,
    };
    let (t0, y0) = match problem.forcing {
        ReducedForcing::Static { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidInput("epsilon must be positive"));
            }
            (0.0, vec![0.0; sys.dim()])
        }
        ReducedForcing::Ramp { nu, start } => {
            if !(nu > 0.0 && start < 0.0) {
                return Err(Error::InvalidInput(
                    "ramp needs nu > 0 and a negative start",
                ));
            }
            let x = libm::sqrt(nu * -start / k);
            let v = 0.5 * nu / (k * x);
            let y = if problem.inertial {
                vec![-x, v]
            } else {
                vec![-x]
            };
            (start, y)
        }
    };
    let mut hits = vec![f64::NAN; levels.len()];
    let mut buf = vec![0.0; sys.dim()];
    let observer = |view: &mut StepView<'_, ReducedSystem>| -> Control {
        let y_new = view.y()[0];
        let y_old = view.y_old()[0];
        for (hit, level) in hits.iter_mut().zip(levels) {
            if !hit.is_nan() || y_new < *level {
                continue;
            }
            *hit = if y_old >= *level {
                view.t_old()
            } else {
                let (ta, tb) = (view.t_old(), view.t());
                brent(
                    |s| {
                        view.interpolate(s, &mut buf);
                        buf[0] - level
                    },
                    ta,
                    tb,
                    4.0 * f64::EPSILON * libm::fabs(tb).max(libm::fabs(tb - ta)),
                    200,
                )
                .unwrap_or(tb)
            };
        }
        if hits.iter().all(|h| !h.is_nan()) {
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let out = integrate(&sys, t0, &y0, t0 + max_time, opts, observer)?;
    if hits.iter().any(|h| h.is_nan()) {
        return Err(Error::MaxTimeExceeded(out.t));
    }
    Ok(hits)
}
