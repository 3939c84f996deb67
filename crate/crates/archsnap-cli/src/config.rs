//! Experiment description read from TOML, with command-line overrides.

use std::path::{Path, PathBuf};

use archsnap::analytic::Regime;
use archsnap::arch::{ArchGeometry, LoadProgram, NondimArch, ScaleSet};
use archsnap::dynamics::{Model, SimulationConfig, Threshold};
use serde::Deserialize;

use crate::Invalid;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentSpec {
    pub arch: ArchSpec,
    pub load: LoadSpec,
    pub dynamics: DynamicsSpec,
    pub compare: CompareSpec,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ArchSpec {
    /// Rise-to-thickness ratio; derived from `geometry` when that is given.
    pub q: Option<f64>,
    /// Nondimensional damping; zero selects the undamped regimes.
    pub c: f64,
    /// As-fabricated mode weights.
    pub a: Vec<f64>,
    /// Mode numbers matching `a`; the symmetric family 1, 5, 9, ... by default.
    pub modes: Option<Vec<usize>>,
    pub geometry: Option<GeometrySpec>,
}

impl Default for ArchSpec {
    fn default() -> Self {
        Self {
            q: None,
            c: 100.0,
            a: vec![1.0],
            modes: None,
            geometry: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub span: f64,
    pub thickness: f64,
    pub width: f64,
    pub youngs_modulus: f64,
    pub density: f64,
    pub rise: f64,
    /// Viscous damping per unit length; overrides `arch.c`.
    #[serde(default)]
    pub damping: f64,
}

impl From<GeometrySpec> for ArchGeometry {
    fn from(g: GeometrySpec) -> Self {
        ArchGeometry {
            span: g.span,
            thickness: g.thickness,
            width: g.width,
            youngs_modulus: g.youngs_modulus,
            density: g.density,
            rise: g.rise,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum LoadKind {
    Static,
    Ramp,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSpec {
    pub kind: LoadKind,
    /// Offset above the switching load for static runs.
    pub epsilon: f64,
    /// Load rate for ramps.
    pub nu: f64,
    /// Initial load for ramps.
    pub f0: f64,
}

impl Default for LoadSpec {
    fn default() -> Self {
        Self {
            kind: LoadKind::Static,
            epsilon: 1e-2,
            nu: 1e3,
            f0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    /// First-order model when damped, second-order otherwise.
    Auto,
    Overdamped,
    SecondOrder,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    pub model: ModelChoice,
    pub rtol: f64,
    pub atol: f64,
    pub max_time: f64,
    /// Switching level as a fraction of the far-branch coordinate.
    pub threshold: Option<f64>,
    /// Switching level as an absolute coordinate; wins over `threshold`.
    pub threshold_coordinate: Option<f64>,
    pub record_every: usize,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self {
            model: ModelChoice::Auto,
            rtol: 1e-12,
            atol: 1e-12,
            max_time: 1e7,
            threshold: None,
            threshold_coordinate: None,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    pub regimes: Vec<String>,
    /// Values of `Q`; the arch's own when empty.
    pub q: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            regimes: vec!["static-damped".into()],
            q: Vec::new(),
            epsilon: vec![1e-3, 1e-2, 1e-1],
            nu: vec![1e2, 1e3, 1e4, 1e5],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub regime: String,
    pub axes: Vec<AxisSpec>,
    /// Run the mode equations for every cell as well as the closed forms.
    pub numeric: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            regime: "ramp-damped".into(),
            axes: Vec::new(),
            numeric: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            workers: 1,
        }
    }
}

/// Flags that take precedence over the configuration file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Rise-to-thickness ratio Q.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Nondimensional damping c.
    #[arg(long, global = true)]
    pub damping: Option<f64>,
    /// Comma-separated as-fabricated mode weights.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// Comma-separated mode numbers matching the weights.
    #[arg(long, global = true, value_delimiter = ',')]
    pub modes: Option<Vec<usize>>,
    /// Static load offset; selects a static load.
    #[arg(long, global = true, conflicts_with = "nu")]
    pub epsilon: Option<f64>,
    /// Ramp rate; selects a ramp load.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelFlag>,
    /// Switching level as a fraction of the far-branch coordinate.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub max_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelFlag {
    Auto,
    Overdamped,
    SecondOrder,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, Invalid> {
        toml::from_str(text).map_err(|e| Invalid(format!("config: {e}")))
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Invalid(format!("cannot read {}: {e}", p.display())))?;
                Ok(Self::from_toml(&text)?)
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(q) = o.q {
            self.arch.q = Some(q);
        }
        if let Some(c) = o.damping {
            self.arch.c = c;
        }
        if let Some(w) = &o.weights {
            self.arch.a = w.clone();
        }
        if let Some(m) = &o.modes {
            self.arch.modes = Some(m.clone());
        }
        if let Some(e) = o.epsilon {
            self.load.kind = LoadKind::Static;
            self.load.epsilon = e;
        }
        if let Some(nu) = o.nu {
            self.load.kind = LoadKind::Ramp;
            self.load.nu = nu;
        }
        if let Some(m) = o.model {
            self.dynamics.model = match m {
                ModelFlag::Auto => ModelChoice::Auto,
                ModelFlag::Overdamped => ModelChoice::Overdamped,
                ModelFlag::SecondOrder => ModelChoice::SecondOrder,
            };
        }
        if let Some(t) = o.threshold {
            self.dynamics.threshold = Some(t);
            self.dynamics.threshold_coordinate = None;
        }
        if let Some(v) = o.rtol {
            self.dynamics.rtol = v;
        }
        if let Some(v) = o.atol {
            self.dynamics.atol = v;
        }
        if let Some(v) = o.max_time {
            self.dynamics.max_time = v;
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match &self.arch.modes {
            Some(m) => m.clone(),
            None => (0..self.arch.a.len()).map(|k| 4 * k + 1).collect(),
        }
    }

    /// Nondimensional arch, and the scales when a geometry is given.
    pub fn build_arch(&self) -> anyhow::Result<(NondimArch, Option<ScaleSet>)> {
        match self.arch.geometry {
            Some(g) => {
                if self.arch.q.is_some() {
                    return Err(
                        Invalid("give either arch.q or arch.geometry, not both".into()).into(),
                    );
                }
                let (arch, scales) = NondimArch::from_geometry(
                    &g.into(),
                    g.damping,
                    self.modes(),
                    self.arch.a.clone(),
                )?;
                Ok((arch, Some(scales)))
            }
            None => {
                let q = self.arch.q.unwrap_or(6.0);
                Ok((
                    NondimArch::new(q, self.arch.c, self.modes(), self.arch.a.clone())?,
                    None,
                ))
            }
        }
    }

    pub fn build_load(&self) -> anyhow::Result<LoadProgram> {
        Ok(match self.load.kind {
            LoadKind::Static => LoadProgram::static_offset(self.load.epsilon)?,
            LoadKind::Ramp => {
                if !(self.load.nu > 0.0) {
                    return Err(Invalid("ramp rate must be positive".into()).into());
                }
                LoadProgram::ramp(self.load.f0, self.load.nu)?
            }
        })
    }

    /// Simulation settings; `damped` decides what `auto` means.
    pub fn simulation(&self, damped: bool) -> anyhow::Result<SimulationConfig> {
        let model = match self.dynamics.model {
            ModelChoice::Auto if damped => Model::Overdamped,
            ModelChoice::Auto => Model::SecondOrder,
            ModelChoice::Overdamped => Model::Overdamped,
            ModelChoice::SecondOrder => Model::SecondOrder,
        };
        let mut cfg = SimulationConfig::new(model);
        cfg.rtol = self.dynamics.rtol;
        cfg.atol = self.dynamics.atol;
        cfg.max_time = self.dynamics.max_time;
        cfg.record_every = self.dynamics.record_every;
        cfg.threshold = match (self.dynamics.threshold_coordinate, self.dynamics.threshold) {
            (Some(v), _) => Some(Threshold::Coordinate(v)),
            (None, Some(t)) => Some(Threshold::RemoteFraction(t)),
            (None, None) => None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_regime(name: &str) -> Result<Regime, Invalid> {
    Regime::parse(name).ok_or_else(|| {
        Invalid(format!(
            "unknown regime '{name}' (expected one of {})",
            Regime::ALL.map(Regime::name).join(", ")
        ))
    })
}

impl AxisSpec {
    pub fn grid(&self) -> Result<Vec<f64>, Invalid> {
        let values = match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                if n == 1 {
                    vec![a]
                } else if self.log {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(Invalid(format!(
                            "axis {}: log grid needs positive bounds",
                            self.name
                        )));
                    }
                    (0..n)
                        .map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64))
                        .collect()
                } else {
                    (0..n)
                        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                        .collect()
                }
            }
            _ => {
                return Err(Invalid(format!(
                    "axis {}: give either `values` or `start`, `stop` and `steps`",
                    self.name
                )))
            }
        };
        if values.is_empty() {
            return Err(Invalid(format!("axis {}: empty grid", self.name)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Invalid(format!(
                "axis {}: grid values must be finite",
                self.name
            )));
        }
        Ok(values)
    }
}
