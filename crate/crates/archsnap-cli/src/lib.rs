//! Experiment harness behind the `archsnap` command-line tool.

pub mod config;
pub mod table;

use std::fmt;

use archsnap::analytic::{predict as predict_switching, Regime, SwitchingPrediction};
use archsnap::arch::{LoadProgram, NondimArch, ScaleSet};
use archsnap::dynamics::{
    detect_switching, inertia_negligible, simulate as run_model, Model, SwitchingEvent,
};
use archsnap::statics::{critical_point, solve_constrained, CriticalPoint};
use rayon::prelude::*;
use serde_json::{json, Value};

use config::{parse_regime, ExperimentSpec, LoadKind};
use table::{Cell, Table};

/// Invalid configuration or arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NOT_BISTABLE: u8 = 3;
pub const EXIT_INTEGRATION: u8 = 4;

/// Process exit status for an error.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Invalid>().is_some() {
        return EXIT_VALIDATION;
    }
    match err.downcast_ref::<archsnap::Error>() {
        Some(e) => library_exit_code(e),
        None => EXIT_FAILURE,
    }
}

fn library_exit_code(e: &archsnap::Error) -> u8 {
    use archsnap::Error::*;
    match e {
        NotBistable | DegenerateReduction(_) => EXIT_NOT_BISTABLE,
        NewtonDivergence { .. }
        | StepSizeUnderflow(_)
        | TooManySteps(_)
        | MaxTimeExceeded(_)
        | NonFinite(_)
        | NoSwitching => EXIT_INTEGRATION,
        _ => EXIT_VALIDATION,
    }
}

/// Status column value for a failed row.
fn status_of(err: &anyhow::Error) -> &'static str {
    match exit_code(err) {
        EXIT_VALIDATION => "invalid",
        EXIT_NOT_BISTABLE => "not-bistable",
        EXIT_INTEGRATION => "integration-failed",
        _ => "failed",
    }
}

/// Output of a subcommand: the table, optional extra JSON content, and a
/// failure that decides the exit status after the table has been written.
pub struct Report {
    pub table: Table,
    pub extra: Option<(&'static str, Value)>,
    pub failure: Option<anyhow::Error>,
}

impl Report {
    fn ok(table: Table) -> Self {
        Self {
            table,
            extra: None,
            failure: None,
        }
    }
}

fn mode_columns(prefix: &str, arch: &NondimArch) -> Vec<String> {
    arch.modes()
        .iter()
        .map(|m| format!("{prefix}{m}"))
        .collect()
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Fold location, normal-form coefficients and bistability verdict.
pub fn critical(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let (arch, scales) = spec.build_arch()?;
    let mut columns = cols(&[
        "q",
        "c",
        "bistable",
        "delta_c",
        "f_c",
        "curvature",
        "load_gain",
        "eigenvalue_ratio",
        "remote_delta",
        "remote_coordinate",
        "f_c_dimensional",
        "delta_c_dimensional",
    ]);
    columns.extend(mode_columns("a_c_", &arch));
    columns.extend(mode_columns("v1_", &arch));
    let mut table = Table::new("critical", columns);
    let n = arch.len();
    match critical_point(&arch) {
        Ok(cp) => {
            let remote = cp.remote.as_ref();
            let mut row: Vec<Cell> = vec![
                arch.q().into(),
                arch.damping().into(),
                true.into(),
                cp.delta.into(),
                cp.force.into(),
                cp.curvature.into(),
                cp.load_gain.into(),
                cp.eigenvalue_ratio.into(),
                remote.map(|r| r.delta).into(),
                remote.map(|r| r.coordinate).into(),
                scales.map(|s| s.load_to_dimensional(cp.force)).into(),
                scales
                    .map(|s| s.displacement_to_dimensional(cp.delta))
                    .into(),
            ];
            row.extend(cp.weights.iter().map(|v| Cell::from(*v)));
            row.extend(cp.null_vector.iter().map(|v| Cell::from(*v)));
            table.push(row);
            Ok(Report::ok(table))
        }
        Err(e)
            if matches!(
                e,
                archsnap::Error::NotBistable | archsnap::Error::DegenerateReduction(_)
            ) =>
        {
            let mut row: Vec<Cell> = vec![arch.q().into(), arch.damping().into(), false.into()];
            row.extend((0..9 + 2 * n).map(|_| Cell::Num(None)));
            table.push(row);
            Ok(Report {
                table,
                extra: Some(("error", Value::from(e.to_string()))),
                failure: Some(e.into()),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn prediction_row(
    p: &SwitchingPrediction,
    cp: &CriticalPoint,
    scales: Option<ScaleSet>,
) -> Vec<Cell> {
    vec![
        p.regime.name().into(),
        cp.force.into(),
        p.curvature.into(),
        cp.load_gain.into(),
        p.forcing.into(),
        p.damping.into(),
        p.tau_c.into(),
        p.tau_inf.into(),
        p.delay.into(),
        p.f_switch.into(),
        scales.map(|s| s.time_to_dimensional(p.tau_inf)).into(),
    ]
}

/// Closed-form switching prediction for the configured load.
pub fn predict(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let (arch, scales) = spec.build_arch()?;
    let load = spec.build_load()?;
    let cp = critical_point(&arch)?.with_load(&load);
    let damped = arch.damping() > 0.0;
    let p = predict_switching(&arch, &cp, &load, damped)?;
    if damped && !inertia_negligible(&arch, &cp, &load) {
        eprintln!("warning: damping is too light for the first-order prediction to be reliable");
    }
    let mut table = Table::new(
        "predict",
        cols(&[
            "regime",
            "f_c",
            "curvature",
            "load_gain",
            "forcing",
            "damping",
            "tau_c",
            "tau_inf",
            "delay",
            "f_switch",
            "tau_inf_dimensional",
        ]),
    );
    table.push(prediction_row(&p, &cp, scales));
    Ok(Report::ok(table))
}

/// Static force at each requested deflection, following the loading branch
/// from the as-fabricated shape. `None` past the reach of the continuation.
pub fn static_force_at(arch: &NondimArch, deltas: &[f64]) -> Vec<Option<f64>> {
    let top = deltas.iter().fold(0.0f64, |m, d| m.max(*d));
    let points = 800;
    let mut grid = vec![(0.0, 0.0)];
    let mut w = arch.weights().to_vec();
    for k in 1..=points {
        let d = top * k as f64 / points as f64;
        match solve_constrained(arch, d, &w) {
            Ok((nw, f)) => {
                grid.push((d, f));
                w = nw;
            }
            Err(_) => break,
        }
    }
    deltas
        .iter()
        .map(|&d| {
            let k = grid.windows(2).position(|s| s[0].0 <= d && d <= s[1].0)?;
            let ((d0, f0), (d1, f1)) = (grid[k], grid[k + 1]);
            Some(f0 + (f1 - f0) * (d - d0) / (d1 - d0))
        })
        .collect()
}

/// Time series of one run, with the static curve at the same deflections.
pub fn simulate(spec: &ExperimentSpec) -> anyhow::Result<Report> {
    let (arch, _) = spec.build_arch()?;
    let load = spec.build_load()?;
    let cp = critical_point(&arch)?.with_load(&load);
    let light = arch.damping() > 0.0 && !inertia_negligible(&arch, &cp, &load);
    let cfg = spec.simulation(arch.damping() > 0.0 && !light)?;
    if cfg.model == Model::Overdamped && light {
        eprintln!("warning: damping is too light for the first-order model to be reliable");
    }
    let ts = run_model(&arch, &cp, &load, &cfg)?;
    let event = detect_switching(&ts, &cp, &cfg);
    let mut columns = cols(&[
        "tau",
        "delta",
        "force",
        "coordinate",
        "static_force",
        "bending",
        "compression",
        "work",
        "kinetic",
        "total",
    ]);
    columns.extend(mode_columns("a", &arch));
    columns.extend(mode_columns("rate", &arch));
    let mut table = Table::new("simulate", columns);
    let deltas: Vec<f64> = ts.samples.iter().map(|s| s.delta).collect();
    let statics = static_force_at(&arch, &deltas);
    for (s, fs) in ts.samples.iter().zip(statics) {
        let e = &s.energies;
        let mut row: Vec<Cell> = vec![
            s.tau.into(),
            s.delta.into(),
            s.force.into(),
            s.coordinate.into(),
            fs.into(),
            e.bending.into(),
            e.compression.into(),
            e.work.into(),
            e.kinetic.into(),
            e.total.into(),
        ];
        row.extend(s.weights.iter().map(|v| Cell::from(*v)));
        row.extend(s.rates.iter().map(|v| Cell::from(*v)));
        table.push(row);
    }
    let switching = match &event {
        Ok(ev) => {
            eprintln!(
                "switched at tau = {} with F = {} ({} model)",
                ev.tau_switch,
                ev.f_switch,
                cfg.model.name()
            );
            json!({ "tau_switch": ev.tau_switch, "f_switch": ev.f_switch, "level": ev.level, "model": cfg.model.name() })
        }
        Err(_) => Value::Null,
    };
    let failure = if cfg.stop_at_switch {
        event.err().map(Into::into)
    } else {
        None
    };
    Ok(Report {
        table,
        extra: Some(("switching", switching)),
        failure,
    })
}

/// Analytic and numerical results for one arch and load.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellResult {
    pub f_c: Option<f64>,
    pub curvature: Option<f64>,
    pub load_gain: Option<f64>,
    pub tau_c: Option<f64>,
    pub tau_analytic: Option<f64>,
    pub delay_analytic: Option<f64>,
    pub f_switch_analytic: Option<f64>,
    pub tau_numeric: Option<f64>,
    pub delay_numeric: Option<f64>,
    pub f_switch_numeric: Option<f64>,
    pub model: Option<Model>,
    pub status: String,
    pub message: String,
}

impl CellResult {
    pub fn rel_error(&self) -> Option<f64> {
        Some((self.tau_numeric? - self.tau_analytic?).abs() / self.tau_numeric?)
    }

    pub fn delay_rel_error(&self) -> Option<f64> {
        Some((self.delay_numeric? - self.delay_analytic?).abs() / self.delay_numeric?)
    }

    fn fail(mut self, err: anyhow::Error) -> Self {
        self.status = status_of(&err).into();
        self.message = err.to_string();
        self
    }
}

/// Runs the closed forms and, when `numeric`, the mode equations for one case.
/// Failures are recorded in the result rather than returned.
pub fn run_cell(
    spec: &ExperimentSpec,
    arch: &NondimArch,
    load: &LoadProgram,
    regime: Regime,
    numeric: bool,
) -> CellResult {
    let mut out = CellResult {
        status: "ok".into(),
        ..CellResult::default()
    };
    let cp = match critical_point(arch) {
        Ok(cp) => cp.with_load(load),
        Err(e) => return out.fail(e.into()),
    };
    out.f_c = Some(cp.force);
    out.curvature = Some(cp.curvature);
    out.load_gain = Some(cp.load_gain);
    out.tau_c = cp.tau_c;
    match predict_switching(arch, &cp, load, regime.is_damped()) {
        Ok(p) => {
            out.tau_analytic = Some(p.tau_inf);
            out.delay_analytic = p.delay;
            out.f_switch_analytic = p.f_switch;
        }
        Err(e) => return out.fail(e.into()),
    }
    if !numeric {
        return out;
    }
    let cfg = match spec.simulation(regime.is_damped()) {
        Ok(mut c) => {
            c.record_every = 0;
            c
        }
        Err(e) => return out.fail(e),
    };
    out.model = Some(cfg.model);
    let event: anyhow::Result<SwitchingEvent> = run_model(arch, &cp, load, &cfg)
        .and_then(|ts| detect_switching(&ts, &cp, &cfg))
        .map_err(Into::into);
    match event {
        Ok(ev) => {
            out.tau_numeric = Some(ev.tau_switch);
            out.f_switch_numeric = Some(ev.f_switch);
            out.delay_numeric = cp.tau_c.map(|t| ev.tau_switch - t);
            out
        }
        Err(e) => out.fail(e),
    }
}

fn regime_arch(
    spec: &ExperimentSpec,
    q: Option<f64>,
    regime: Regime,
) -> anyhow::Result<NondimArch> {
    let mut s = spec.clone();
    if let Some(q) = q {
        s.arch.q = Some(q);
        s.arch.geometry = None;
    }
    let (arch, _) = s.build_arch()?;
    if regime.is_damped() {
        if !(arch.damping() > 0.0) {
            return Err(Invalid(format!("regime {regime} needs positive damping")).into());
        }
        Ok(arch)
    } else {
        Ok(arch.with_damping(0.0)?)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Per regime and `Q`: the worst relative error and the fitted power-law
/// slopes of the switching time (static) or delay (ramp).
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub regime: Regime,
    pub q: f64,
    pub rows: usize,
    pub failures: usize,
    pub max_rel_error: Option<f64>,
    pub slope_numeric: Option<f64>,
    pub slope_analytic: Option<f64>,
}

pub struct Comparison {
    pub table: Table,
    pub cells: Vec<(Regime, f64, f64, CellResult)>,
    pub summary: Vec<CompareSummary>,
}

/// Analytic versus numerical switching over the configured grids.
pub fn compare(spec: &ExperimentSpec, workers: usize) -> anyhow::Result<Comparison> {
    let c = &spec.compare;
    if c.regimes.is_empty() {
        return Err(Invalid("compare needs at least one regime".into()).into());
    }
    let regimes = c
        .regimes
        .iter()
        .map(|r| parse_regime(r))
        .collect::<Result<Vec<_>, _>>()?;
    let qs: Vec<Option<f64>> = if c.q.is_empty() {
        vec![None]
    } else {
        c.q.iter().map(|q| Some(*q)).collect()
    };
    let mut jobs = Vec::new();
    for &regime in &regimes {
        let grid = if regime.is_ramp() { &c.nu } else { &c.epsilon };
        if grid.is_empty() {
            let name = if regime.is_ramp() { "nu" } else { "epsilon" };
            return Err(Invalid(format!("compare.{name} grid is empty")).into());
        }
        if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Invalid("compare grids must be positive and finite".into()).into());
        }
        for &q in &qs {
            let arch = regime_arch(spec, q, regime)?;
            for &x in grid {
                let load = if regime.is_ramp() {
                    LoadProgram::ramp(spec.load.f0, x)?
                } else {
                    LoadProgram::static_offset(x)?
                };
                jobs.push((regime, arch.clone(), x, load));
            }
        }
    }
    let results = in_pool(workers, || {
        jobs.par_iter()
            .map(|(regime, arch, _, load)| run_cell(spec, arch, load, *regime, true))
            .collect::<Vec<_>>()
    })?;
    let mut table = Table::new(
        "compare",
        cols(&[
            "regime",
            "q",
            "c",
            "epsilon",
            "nu",
            "f_c",
            "curvature",
            "load_gain",
            "tau_c",
            "tau_analytic",
            "delay_analytic",
            "tau_numeric",
            "delay_numeric",
            "f_switch_analytic",
            "f_switch_numeric",
            "rel_error",
            "delay_rel_error",
            "model",
            "status",
            "message",
        ]),
    );
    let mut cells = Vec::new();
    for ((regime, arch, x, _), r) in jobs.iter().zip(results) {
        let (eps, nu) = if regime.is_ramp() {
            (None, Some(*x))
        } else {
            (Some(*x), None)
        };
        table.push(vec![
            regime.name().into(),
            arch.q().into(),
            arch.damping().into(),
            eps.into(),
            nu.into(),
            r.f_c.into(),
            r.curvature.into(),
            r.load_gain.into(),
            r.tau_c.into(),
            r.tau_analytic.into(),
            r.delay_analytic.into(),
            r.tau_numeric.into(),
            r.delay_numeric.into(),
            r.f_switch_analytic.into(),
            r.f_switch_numeric.into(),
            r.rel_error().into(),
            r.delay_rel_error().into(),
            r.model.map_or("", |m| m.name()).into(),
            r.status.clone().into(),
            r.message.clone().into(),
        ]);
        cells.push((*regime, arch.q(), *x, r));
    }
    let mut summary: Vec<CompareSummary> = Vec::new();
    for (regime, q, x, r) in &cells {
        let idx = match summary
            .iter()
            .position(|s| s.regime == *regime && s.q == *q)
        {
            Some(i) => i,
            None => {
                summary.push(CompareSummary {
                    regime: *regime,
                    q: *q,
                    rows: 0,
                    failures: 0,
                    max_rel_error: None,
                    slope_numeric: None,
                    slope_analytic: None,
                });
                summary.len() - 1
            }
        };
        let s = &mut summary[idx];
        s.rows += 1;
        if r.status != "ok" {
            s.failures += 1;
        }
        let err = if regime.is_ramp() {
            r.delay_rel_error()
        } else {
            r.rel_error()
        };
        if let Some(e) = err {
            s.max_rel_error = Some(s.max_rel_error.map_or(e, |m: f64| m.max(e)));
        }
        let _ = x;
    }
    for s in &mut summary {
        let pick = |numeric: bool| {
            cells
                .iter()
                .filter(|(r, q, _, _)| *r == s.regime && *q == s.q)
                .filter_map(|(r, _, x, c)| {
                    let y = match (r.is_ramp(), numeric) {
                        (true, true) => c.delay_numeric,
                        (true, false) => c.delay_analytic,
                        (false, true) => c.tau_numeric,
                        (false, false) => c.tau_analytic,
                    }?;
                    Some((*x, y))
                })
                .collect::<Vec<_>>()
        };
        s.slope_numeric = loglog_slope(&pick(true));
        s.slope_analytic = loglog_slope(&pick(false));
    }
    Ok(Comparison {
        table,
        cells,
        summary,
    })
}

pub fn summary_json(summary: &[CompareSummary]) -> Value {
    Value::Array(
        summary
            .iter()
            .map(|s| {
                json!({
                    "regime": s.regime.name(),
                    "q": s.q,
                    "rows": s.rows,
                    "failures": s.failures,
                    "max_rel_error": s.max_rel_error,
                    "slope_numeric": s.slope_numeric,
                    "slope_analytic": s.slope_analytic,
                })
            })
            .collect(),
    )
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if workers == 0 {
        return Err(Invalid("workers must be at least 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(job))
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Param {
    Q,
    Damping,
    Epsilon,
    Nu,
    /// Weight of the given mode number.
    Weight(usize),
}

fn parse_param(name: &str, modes: &[usize]) -> Result<Param, Invalid> {
    let p = match name {
        "q" => Param::Q,
        "c" => Param::Damping,
        "epsilon" => Param::Epsilon,
        "nu" => Param::Nu,
        _ => {
            let m: usize = name
                .strip_prefix('a')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Invalid(format!("unknown sweep parameter '{name}'")))?;
            if !modes.contains(&m) {
                return Err(Invalid(format!(
                    "sweep parameter '{name}' refers to mode {m}, which is not retained"
                )));
            }
            Param::Weight(m)
        }
    };
    Ok(p)
}

fn set_param(spec: &mut ExperimentSpec, p: Param, v: f64, modes: &[usize]) {
    match p {
        Param::Q => spec.arch.q = Some(v),
        Param::Damping => spec.arch.c = v,
        Param::Epsilon => spec.load.epsilon = v,
        Param::Nu => spec.load.nu = v,
        Param::Weight(m) => {
            if let Some(i) = modes.iter().position(|&x| x == m) {
                spec.arch.a[i] = v;
            }
        }
    }
}

/// Long-form grid over one or two parameters, evaluated in parallel. Row
/// order follows the grid (first axis outermost) whatever the worker count.
pub fn sweep(spec: &ExperimentSpec, workers: usize) -> anyhow::Result<Table> {
    let sw = &spec.sweep;
    if sw.axes.is_empty() || sw.axes.len() > 2 {
        return Err(Invalid("sweep needs one or two axes".into()).into());
    }
    let regime = parse_regime(&sw.regime)?;
    let modes = spec.modes();
    if modes.len() != spec.arch.a.len() {
        return Err(Invalid("arch.modes and arch.a differ in length".into()).into());
    }
    let mut axes = Vec::new();
    for a in &sw.axes {
        let p = parse_param(&a.name, &modes)?;
        if axes
            .iter()
            .any(|(q, _, _): &(Param, String, Vec<f64>)| *q == p)
        {
            return Err(Invalid(format!("sweep axis '{}' given twice", a.name)).into());
        }
        if matches!(p, Param::Q) && spec.arch.geometry.is_some() {
            return Err(
                Invalid("cannot sweep q when the arch is given by its geometry".into()).into(),
            );
        }
        axes.push((p, a.name.clone(), a.grid()?));
    }
    let mut cells: Vec<Vec<f64>> = vec![Vec::new()];
    for (_, _, grid) in &axes {
        cells = cells
            .iter()
            .flat_map(|prefix| {
                grid.iter()
                    .map(move |v| [prefix.as_slice(), &[*v]].concat())
            })
            .collect();
    }
    let mut base = spec.clone();
    base.load.kind = if regime.is_ramp() {
        LoadKind::Ramp
    } else {
        LoadKind::Static
    };
    let results = in_pool(workers, || {
        cells
            .par_iter()
            .map(|values| {
                let mut s = base.clone();
                for ((p, _, _), v) in axes.iter().zip(values) {
                    set_param(&mut s, *p, *v, &modes);
                }
                let built =
                    regime_arch(&s, None, regime).and_then(|arch| Ok((arch, s.build_load()?)));
                match built {
                    Ok((arch, load)) => run_cell(&s, &arch, &load, regime, sw.numeric),
                    Err(e) => CellResult::default().fail(e),
                }
            })
            .collect::<Vec<_>>()
    })?;
    let mut columns: Vec<String> = axes.iter().map(|(_, n, _)| n.clone()).collect();
    columns.extend(cols(&[
        "regime",
        "status",
        "f_c",
        "curvature",
        "load_gain",
        "tau_c",
        "tau_analytic",
        "delay_analytic",
        "f_switch_analytic",
        "tau_numeric",
        "delay_numeric",
        "f_switch_numeric",
        "model",
        "message",
    ]));
    let mut table = Table::new("sweep", columns);
    for (values, r) in cells.iter().zip(results) {
        let mut row: Vec<Cell> = values.iter().map(|v| Cell::from(*v)).collect();
        row.extend([
            regime.name().into(),
            r.status.clone().into(),
            r.f_c.into(),
            r.curvature.into(),
            r.load_gain.into(),
            r.tau_c.into(),
            r.tau_analytic.into(),
            r.delay_analytic.into(),
            r.f_switch_analytic.into(),
            r.tau_numeric.into(),
            r.delay_numeric.into(),
            r.f_switch_numeric.into(),
            r.model.map_or("", |m| m.name()).into(),
            r.message.clone().into(),
        ]);
        table.push(row);
    }
    Ok(table)
}
