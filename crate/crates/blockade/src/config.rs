//! Run configuration files.
//!
//! Configs are TOML with three optional tables. Every key below is optional;
//! the value after `=` is the default.
//!
//! ```toml
//! [model]
//! kind = "two_mode"     # or "three_mode" (adds the readout cavity)
//! delta = 0.0           # detuning Δ, units of κ
//! J = 0.0               # resonator-qubit coupling
//! eps = 0.0             # mechanical drive ε
//! omega = 0.0           # qubit drive Ω (ignored for optimal drives)
//! phi = 0.0             # drive phase φ, radians
//! kappa = 1.0           # qubit damping κ
//! gamma = 1.0           # mechanical damping γ
//! n_th = 0.0            # bath occupation, shared by qubit and resonator
//! drive = "fixed"       # or "optimal_plus" / "optimal_minus"
//! # delta_opt =         # required for optimal drives and root outputs
//! # mech_cutoff = 8     # 6 for three_mode
//! # three_mode only:
//! # G = 0.0             # |G|
//! # G_phase = 0.0       # arg G, radians
//! # Gamma = 10.0        # cavity damping Γ
//! # cavity_cutoff = 3
//!
//! [task]
//! outputs = ["g2_zero", "n_b"]   # also "g2_tau", "g2a_zero", "eta_phi_roots"
//! convergence_check = true
//! # tau = [0.0, 0.5, 1.0]        # explicit delays, or:
//! # tau_range = { start = 0.0, stop = 18.85, points = 61 }
//!
//! [[task.axis]]                  # one or two, first is outermost
//! param = "delta"
//! start = -15.0                  # or: values = [...]
//! stop = 15.0
//! points = 61
//! spacing = "linear"             # or "log"
//!
//! [[task.link]]                  # target = factor * source (or |source|)
//! target = "J"
//! source = "delta"
//! factor = 1.0
//! abs = false
//!
//! [output]
//! dir = "out"                    # BLOCKADE_OUT_DIR overrides
//! name = "run"
//! plot_script = true
//! ```

use std::fmt;
use std::path::Path;

use blockade_core::analytics::Branch;
use serde::{Deserialize, Serialize};

use crate::sweep::{linspace, logspace, Axis, Link, ModelKind, Output, Param, ParamSet, QubitDrive, SweepSpec, Truncation};

/// Default cavity damping when the three-mode model is selected without one.
pub const DEFAULT_CAVITY_DAMPING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    TwoMode,
    ThreeMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    #[default]
    Fixed,
    OptimalPlus,
    OptimalMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: Kind,
    pub delta: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub eps: f64,
    pub omega: f64,
    pub phi: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_th: f64,
    pub drive: DriveKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mech_cutoff: Option<usize>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(rename = "G_phase", skip_serializing_if = "Option::is_none")]
    pub g_phase: Option<f64>,
    #[serde(rename = "Gamma", skip_serializing_if = "Option::is_none")]
    pub cavity_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity_cutoff: Option<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: Kind::TwoMode,
            delta: 0.0,
            j: 0.0,
            eps: 0.0,
            omega: 0.0,
            phi: 0.0,
            kappa: 1.0,
            gamma: 1.0,
            n_th: 0.0,
            drive: DriveKind::Fixed,
            delta_opt: None,
            mech_cutoff: None,
            g: None,
            g_phase: None,
            cavity_damping: None,
            cavity_cutoff: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub target: String,
    pub source: String,
    #[serde(default = "one")]
    pub factor: f64,
    #[serde(default)]
    pub abs: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub outputs: Vec<String>,
    pub convergence_check: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_range: Option<RangeConfig>,
    #[serde(rename = "axis", skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisConfig>,
    #[serde(rename = "link", skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkConfig>,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            outputs: vec!["g2_zero".into(), "n_b".into()],
            convergence_check: true,
            tau: None,
            tau_range: None,
            axes: Vec::new(),
            links: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub name: String,
    pub plot_script: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            name: "run".into(),
            plot_script: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub task: TaskSection,
    pub output: OutputSection,
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

/// Parses config text. Syntax and schema errors carry the line number.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))
}

/// Parses config text and then applies `section.key=value` overrides.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let parsed = parse_config(text)?;
    if overrides.is_empty() {
        return Ok(parsed);
    }
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    RunConfig::deserialize(table).map_err(|e| ConfigError(format!("after overrides: {}", e.to_string().trim_end())))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let Some((path, raw)) = item.split_once('=') else {
        return err(format!("override `{item}` is not of the form section.key=value"));
    };
    let path: Vec<&str> = path.trim().split('.').collect();
    if path.len() != 2 || path.iter().any(|p| p.is_empty()) {
        return err(format!("override key `{}` must be section.key", path.join(".")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let section = table
        .entry(path[0].to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match section {
        toml::Value::Table(t) => {
            t.insert(path[1].to_string(), value);
            Ok(())
        }
        _ => err(format!("`{}` is not a table", path[0])),
    }
}

fn grid(name: &str, values: &Option<Vec<f64>>, range: Option<RangeConfig>) -> Result<Vec<f64>, ConfigError> {
    match (values, range) {
        (Some(_), Some(_)) => err(format!("{name}: give either explicit values or a range, not both")),
        (Some(v), None) => Ok(v.clone()),
        (None, Some(r)) => {
            if r.points == 0 {
                return err(format!("{name}: `points` must be positive"));
            }
            if r.spacing == Spacing::Log && !(r.start > 0.0 && r.stop > 0.0) {
                return err(format!("{name}: log spacing needs positive `start` and `stop`"));
            }
            Ok(match r.spacing {
                Spacing::Linear => linspace(r.start, r.stop, r.points),
                Spacing::Log => logspace(r.start, r.stop, r.points),
            })
        }
        (None, None) => err(format!("{name}: needs `values` or `start`/`stop`/`points`")),
    }
}

impl AxisConfig {
    fn range(&self) -> Result<Option<RangeConfig>, ConfigError> {
        match (self.start, self.stop, self.points) {
            (None, None, None) => {
                if self.spacing.is_some() {
                    return err(format!("axis `{}`: `spacing` needs a range", self.param));
                }
                Ok(None)
            }
            (Some(start), Some(stop), Some(points)) => Ok(Some(RangeConfig {
                start,
                stop,
                points,
                spacing: self.spacing.unwrap_or_default(),
            })),
            _ => err(format!("axis `{}`: a range needs all of `start`, `stop` and `points`", self.param)),
        }
    }
}

fn parse_param(key: &str, name: &str) -> Result<Param, ConfigError> {
    name.parse().map_err(|e| ConfigError(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn model_kind(&self) -> ModelKind {
        match self.model.kind {
            Kind::TwoMode => ModelKind::TwoMode,
            Kind::ThreeMode => ModelKind::ThreeMode,
        }
    }

    pub fn drive(&self) -> QubitDrive {
        match self.model.drive {
            DriveKind::Fixed => QubitDrive::Fixed,
            DriveKind::OptimalPlus => QubitDrive::Optimal(Branch::Plus),
            DriveKind::OptimalMinus => QubitDrive::Optimal(Branch::Minus),
        }
    }

    /// Checks the model table and returns the baseline parameters.
    pub fn baseline(&self) -> Result<ParamSet, ConfigError> {
        let m = &self.model;
        let three = m.kind == Kind::ThreeMode;
        if !three {
            for (key, set) in [
                ("G", m.g.is_some()),
                ("G_phase", m.g_phase.is_some()),
                ("Gamma", m.cavity_damping.is_some()),
                ("cavity_cutoff", m.cavity_cutoff.is_some()),
            ] {
                if set {
                    return err(format!("model.{key} is only valid with kind = \"three_mode\""));
                }
            }
        }
        let mq = blockade_core::model::MqParams {
            delta: m.delta,
            j: m.j,
            eps: m.eps,
            omega: m.omega,
            phi: m.phi,
            kappa: m.kappa,
            gamma: m.gamma,
            n_th: m.n_th,
        };
        let mut ps = ParamSet::from_mq(mq);
        ps.g = m.g.unwrap_or(0.0);
        ps.g_phase = m.g_phase.unwrap_or(0.0);
        ps.cavity_damping = m.cavity_damping.unwrap_or(DEFAULT_CAVITY_DAMPING);
        ps.delta_opt = m.delta_opt;
        if ps.g < 0.0 {
            return err("model.G is a modulus and must be non-negative");
        }
        let check = if three {
            ps.detection().validated().map(|_| ())
        } else {
            mq.validated().map(|_| ())
        };
        check.map_err(|e| ConfigError(format!("model: {e}")))?;
        if m.drive != DriveKind::Fixed && m.delta_opt.is_none() && !self.task.axes.iter().any(|a| a.param == "delta_opt") {
            return err("model.delta_opt is required when model.drive is optimal_plus or optimal_minus");
        }
        Ok(ps)
    }

    pub fn truncation(&self) -> Truncation {
        let kind = self.model_kind();
        let d = Truncation::default_for(kind);
        Truncation {
            mech_cutoff: self.model.mech_cutoff.unwrap_or(d.mech_cutoff),
            cavity_cutoff: self.model.cavity_cutoff.unwrap_or(d.cavity_cutoff),
            convergence_check: self.task.convergence_check,
        }
    }

    pub fn outputs(&self) -> Result<Vec<Output>, ConfigError> {
        self.task
            .outputs
            .iter()
            .map(|o| o.parse().map_err(|e| ConfigError(format!("task.outputs: {e}"))))
            .collect()
    }

    pub fn tau_grid(&self) -> Result<Option<Vec<f64>>, ConfigError> {
        match (&self.task.tau, &self.task.tau_range) {
            (None, None) => Ok(None),
            (v, r) => grid("task.tau", v, r.clone()).map(Some),
        }
    }

    /// Builds the sweep described by the `[task]` table.
    pub fn to_sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let baseline = self.baseline()?;
        let axes = self
            .task
            .axes
            .iter()
            .map(|a| {
                let param = parse_param("task.axis.param", &a.param)?;
                let values = grid(&format!("axis `{}`", a.param), &a.values, a.range()?)?;
                Ok(Axis::new(param, values))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let links = self
            .task
            .links
            .iter()
            .map(|l| {
                Ok(Link {
                    target: parse_param("task.link.target", &l.target)?,
                    source: parse_param("task.link.source", &l.source)?,
                    factor: l.factor,
                    abs: l.abs,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let spec = SweepSpec {
            name: self.output.name.clone(),
            model: self.model_kind(),
            baseline,
            drive: self.drive(),
            axes,
            links,
            outputs: self.outputs()?,
            tau_grid: self.tau_grid()?,
            truncation: self.truncation(),
        };
        spec.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(spec)
    }

    /// Config with every default written out and every grid expanded to
    /// explicit values, so that running it again reproduces the same job.
    pub fn resolved(&self) -> Result<RunConfig, ConfigError> {
        let mut out = self.clone();
        let t = self.truncation();
        out.model.mech_cutoff = Some(t.mech_cutoff);
        if self.model.kind == Kind::ThreeMode {
            out.model.g = Some(self.model.g.unwrap_or(0.0));
            out.model.g_phase = Some(self.model.g_phase.unwrap_or(0.0));
            out.model.cavity_damping = Some(self.model.cavity_damping.unwrap_or(DEFAULT_CAVITY_DAMPING));
            out.model.cavity_cutoff = Some(t.cavity_cutoff);
        }
        out.task.tau = self.tau_grid()?;
        out.task.tau_range = None;
        for a in &mut out.task.axes {
            let values = grid(&format!("axis `{}`", a.param), &a.values, a.range()?)?;
            *a = AxisConfig {
                param: a.param.clone(),
                values: Some(values),
                start: None,
                stop: None,
                points: None,
                spacing: None,
            };
        }
        Ok(out)
    }

    /// Inverse of [`RunConfig::to_sweep_spec`], used to echo preset jobs.
    pub fn from_sweep_spec(spec: &SweepSpec, output: &OutputSection) -> RunConfig {
        let b = &spec.baseline;
        let three = spec.model == ModelKind::ThreeMode;
        let model = ModelSection {
            kind: if three { Kind::ThreeMode } else { Kind::TwoMode },
            delta: b.mq.delta,
            j: b.mq.j,
            eps: b.mq.eps,
            omega: b.mq.omega,
            phi: b.mq.phi,
            kappa: b.mq.kappa,
            gamma: b.mq.gamma,
            n_th: b.mq.n_th,
            drive: match spec.drive {
                QubitDrive::Fixed => DriveKind::Fixed,
                QubitDrive::Optimal(Branch::Plus) => DriveKind::OptimalPlus,
                QubitDrive::Optimal(Branch::Minus) => DriveKind::OptimalMinus,
            },
            delta_opt: b.delta_opt,
            mech_cutoff: Some(spec.truncation.mech_cutoff),
            g: three.then_some(b.g),
            g_phase: three.then_some(b.g_phase),
            cavity_damping: three.then_some(b.cavity_damping),
            cavity_cutoff: three.then_some(spec.truncation.cavity_cutoff),
        };
        let task = TaskSection {
            outputs: spec.outputs.iter().map(|o| o.name().to_string()).collect(),
            convergence_check: spec.truncation.convergence_check,
            tau: spec.tau_grid.clone(),
            tau_range: None,
            axes: spec
                .axes
                .iter()
                .map(|a| AxisConfig {
                    param: a.param.name().into(),
                    values: Some(a.values.clone()),
                    start: None,
                    stop: None,
                    points: None,
                    spacing: None,
                })
                .collect(),
            links: spec
                .links
                .iter()
                .map(|l| LinkConfig {
                    target: l.target.name().into(),
                    source: l.source.name().into(),
                    factor: l.factor,
                    abs: l.abs,
                })
                .collect(),
        };
        RunConfig {
            model,
            task,
            output: OutputSection {
                name: spec.name.clone(),
                ..output.clone()
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
