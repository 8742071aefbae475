//! Grid execution: every point is assembled, solved and reduced to a row of
//! numbers independently, in parallel, and the rows are put back in grid
//! order.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use blockade_core::analytics::{optimal_drive_roots, Branch};
use blockade_core::correlations::{g2_tau, g2_zero, mean_occupation};
use blockade_core::hilbert::{lowering, number, DensityMatrix, HilbertSpace};
use blockade_core::model::{
    three_mode_space, two_mode_space, DetectionParams, MqParams, OpenSystem, CAVITY, DEFAULT_CAVITY_CUTOFF,
    DEFAULT_MECH_CUTOFF, DEFAULT_THREE_MODE_MECH_CUTOFF, MECHANICAL, QUBIT,
};
use blockade_core::solver::{build_liouvillian, steady_state, Liouvillian};
use blockade_core::C64;
use rayon::prelude::*;

/// Relative change of `g²(0)` under the cutoff check above which a row is
/// flagged as not converged.
pub const CONVERGENCE_TOL: f64 = 5e-3;
/// Mechanical cutoff increment used by the convergence check.
pub const CUTOFF_STEP: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("all {0} grid points failed; first error: {1}")]
    AllFailed(usize, blockade_core::Error),
    #[error("unknown figure preset `{0}` (known: fig2 to fig11)")]
    UnknownPreset(String),
}

/// A scalar model parameter that can be swept or linked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Delta,
    J,
    Eps,
    Omega,
    Phi,
    Kappa,
    Gamma,
    NTh,
    /// Modulus of the optomechanical coupling.
    G,
    /// Phase of the optomechanical coupling.
    GPhase,
    /// Cavity damping rate.
    CavityDamping,
    /// Detuning at which the two-drive optimum is evaluated.
    DeltaOpt,
}

impl Param {
    pub const ALL: [Param; 12] = [
        Param::Delta,
        Param::J,
        Param::Eps,
        Param::Omega,
        Param::Phi,
        Param::Kappa,
        Param::Gamma,
        Param::NTh,
        Param::G,
        Param::GPhase,
        Param::CavityDamping,
        Param::DeltaOpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Delta => "delta",
            Param::J => "J",
            Param::Eps => "eps",
            Param::Omega => "omega",
            Param::Phi => "phi",
            Param::Kappa => "kappa",
            Param::Gamma => "gamma",
            Param::NTh => "n_th",
            Param::G => "G",
            Param::GPhase => "G_phase",
            Param::CavityDamping => "Gamma",
            Param::DeltaOpt => "delta_opt",
        }
    }

    fn readout_only(self) -> bool {
        matches!(self, Param::G | Param::GPhase | Param::CavityDamping)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
            format!("unknown parameter `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Flat parameter record covering both models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub mq: MqParams,
    pub g: f64,
    pub g_phase: f64,
    pub cavity_damping: f64,
    pub delta_opt: Option<f64>,
}

impl ParamSet {
    pub fn from_mq(mq: MqParams) -> Self {
        Self {
            mq,
            g: 0.0,
            g_phase: 0.0,
            cavity_damping: 10.0,
            delta_opt: None,
        }
    }

    pub fn from_detection(p: DetectionParams) -> Self {
        Self {
            mq: p.base,
            g: p.g.norm(),
            g_phase: if p.g.norm() > 0.0 { p.g.arg() } else { 0.0 },
            cavity_damping: p.cavity_damping,
            delta_opt: None,
        }
    }

    pub fn get(&self, p: Param) -> Option<f64> {
        Some(match p {
            Param::Delta => self.mq.delta,
            Param::J => self.mq.j,
            Param::Eps => self.mq.eps,
            Param::Omega => self.mq.omega,
            Param::Phi => self.mq.phi,
            Param::Kappa => self.mq.kappa,
            Param::Gamma => self.mq.gamma,
            Param::NTh => self.mq.n_th,
            Param::G => self.g,
            Param::GPhase => self.g_phase,
            Param::CavityDamping => self.cavity_damping,
            Param::DeltaOpt => return self.delta_opt,
        })
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Delta => self.mq.delta = v,
            Param::J => self.mq.j = v,
            Param::Eps => self.mq.eps = v,
            Param::Omega => self.mq.omega = v,
            Param::Phi => self.mq.phi = v,
            Param::Kappa => self.mq.kappa = v,
            Param::Gamma => self.mq.gamma = v,
            Param::NTh => self.mq.n_th = v,
            Param::G => self.g = v,
            Param::GPhase => self.g_phase = v,
            Param::CavityDamping => self.cavity_damping = v,
            Param::DeltaOpt => self.delta_opt = Some(v),
        }
    }

    pub fn detection(&self) -> DetectionParams {
        DetectionParams {
            base: self.mq,
            g: C64::from_polar(self.g, self.g_phase),
            cavity_damping: self.cavity_damping,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Resonator and qubit.
    TwoMode,
    /// Resonator, qubit and readout cavity.
    ThreeMode,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TwoMode => "two_mode",
            ModelKind::ThreeMode => "three_mode",
        }
    }
}

/// How the qubit drive `(Ω, φ)` is chosen at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitDrive {
    /// Use `omega` and `phi` as given.
    Fixed,
    /// `Ω = η ε` and `φ` from the chosen root at `(delta_opt, J, κ, γ)`.
    Optimal(Branch),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: Param, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    /// `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn linear(param: Param, start: f64, stop: f64, points: usize) -> Self {
        Self::new(param, linspace(start, stop, points))
    }

    /// `points` logarithmically spaced values from `start` to `stop`.
    pub fn log(param: Param, start: f64, stop: f64, points: usize) -> Self {
        Self::new(param, logspace(start, stop, points))
    }
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|k| {
                if k == points - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn logspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    linspace(start.log10(), stop.log10(), points)
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            if k == 0 {
                start
            } else if k + 1 == points {
                stop
            } else {
                10f64.powf(e)
            }
        })
        .collect()
}

/// `target = factor · source` (or `factor · |source|`), applied after the
/// axis values are set, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub target: Param,
    pub source: Param,
    pub factor: f64,
    pub abs: bool,
}

impl Link {
    pub fn equal(target: Param, source: Param) -> Self {
        Self {
            target,
            source,
            factor: 1.0,
            abs: false,
        }
    }

    pub fn abs(target: Param, source: Param) -> Self {
        Self {
            target,
            source,
            factor: 1.0,
            abs: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    /// `g²(0)` of the mechanical mode.
    G2Zero,
    /// `g²(τ)` of the mechanical mode on the sweep's τ grid.
    G2Tau,
    /// Mean phonon number.
    NB,
    /// `g²(0)` of the readout cavity (three-mode model only).
    G2aZero,
    /// Both optimal-drive roots.
    EtaPhiRoots,
}

impl Output {
    pub const ALL: [Output; 5] = [Output::G2Zero, Output::G2Tau, Output::NB, Output::G2aZero, Output::EtaPhiRoots];

    pub fn name(self) -> &'static str {
        match self {
            Output::G2Zero => "g2_zero",
            Output::G2Tau => "g2_tau",
            Output::NB => "n_b",
            Output::G2aZero => "g2a_zero",
            Output::EtaPhiRoots => "eta_phi_roots",
        }
    }

    fn needs_state(self) -> bool {
        !matches!(self, Output::EtaPhiRoots)
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            let names: Vec<_> = Output::ALL.iter().map(|o| o.name()).collect();
            format!("unknown output `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub mech_cutoff: usize,
    pub cavity_cutoff: usize,
    /// Re-solve with the mechanical cutoff raised by [`CUTOFF_STEP`].
    pub convergence_check: bool,
}

impl Truncation {
    pub fn default_for(kind: ModelKind) -> Self {
        Self {
            mech_cutoff: match kind {
                ModelKind::TwoMode => DEFAULT_MECH_CUTOFF,
                ModelKind::ThreeMode => DEFAULT_THREE_MODE_MECH_CUTOFF,
            },
            cavity_cutoff: DEFAULT_CAVITY_CUTOFF,
            convergence_check: true,
        }
    }
}

/// A parameter-grid job.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub model: ModelKind,
    pub baseline: ParamSet,
    pub drive: QubitDrive,
    pub axes: Vec<Axis>,
    pub links: Vec<Link>,
    pub outputs: Vec<Output>,
    pub tau_grid: Option<Vec<f64>>,
    pub truncation: Truncation,
}

impl SweepSpec {
    pub fn two_mode(name: impl Into<String>, baseline: MqParams) -> Self {
        Self {
            name: name.into(),
            model: ModelKind::TwoMode,
            baseline: ParamSet::from_mq(baseline),
            drive: QubitDrive::Fixed,
            axes: Vec::new(),
            links: Vec::new(),
            outputs: vec![Output::G2Zero],
            tau_grid: None,
            truncation: Truncation::default_for(ModelKind::TwoMode),
        }
    }

    pub fn three_mode(name: impl Into<String>, baseline: DetectionParams) -> Self {
        Self {
            name: name.into(),
            model: ModelKind::ThreeMode,
            baseline: ParamSet::from_detection(baseline),
            drive: QubitDrive::Fixed,
            axes: Vec::new(),
            links: Vec::new(),
            outputs: vec![Output::G2Zero, Output::G2aZero],
            tau_grid: None,
            truncation: Truncation::default_for(ModelKind::ThreeMode),
        }
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.links.push(link);
        self
    }

    pub fn with_outputs(mut self, outputs: &[Output]) -> Self {
        self.outputs = outputs.to_vec();
        self
    }

    pub fn with_drive(mut self, drive: QubitDrive, delta_opt: Option<f64>) -> Self {
        self.drive = drive;
        if delta_opt.is_some() {
            self.baseline.delta_opt = delta_opt;
        }
        self
    }

    pub fn with_tau_grid(mut self, tau: Vec<f64>) -> Self {
        self.tau_grid = Some(tau);
        self
    }

    pub fn with_mech_cutoff(mut self, cutoff: usize) -> Self {
        self.truncation.mech_cutoff = cutoff;
        self
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::Invalid(m));
        if self.axes.is_empty() || self.axes.len() > 2 {
            return bad(format!("need 1 or 2 axes, got {}", self.axes.len()));
        }
        let mut varied = Vec::new();
        for axis in &self.axes {
            if axis.values.is_empty() {
                return bad(format!("axis `{}` has no values", axis.param));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return bad(format!("axis `{}` has non-finite values", axis.param));
            }
            if varied.contains(&axis.param) {
                return bad(format!("parameter `{}` appears on two axes", axis.param));
            }
            varied.push(axis.param);
        }
        for link in &self.links {
            if !link.factor.is_finite() {
                return bad(format!("link to `{}` has a non-finite factor", link.target));
            }
            if varied.contains(&link.target) {
                return bad(format!("`{}` is both swept and linked", link.target));
            }
            varied.push(link.target);
        }
        for p in varied.iter().chain(self.links.iter().map(|l| &l.source)) {
            self.check_param(*p)?;
        }
        if self.outputs.is_empty() {
            return bad("no outputs requested".into());
        }
        let needs_opt = matches!(self.drive, QubitDrive::Optimal(_)) || self.outputs.contains(&Output::EtaPhiRoots);
        if needs_opt && self.baseline.delta_opt.is_none() && !varied.contains(&Param::DeltaOpt) {
            return bad("`delta_opt` must be set for the optimal drive or root outputs".into());
        }
        if let QubitDrive::Optimal(_) = self.drive {
            if varied.iter().any(|p| matches!(p, Param::Omega | Param::Phi)) {
                return bad("`omega` and `phi` are set by the optimal drive and cannot be swept".into());
            }
        }
        if self.outputs.contains(&Output::G2aZero) && self.model != ModelKind::ThreeMode {
            return bad("`g2a_zero` needs the three-mode model".into());
        }
        if self.outputs.contains(&Output::G2Tau) {
            match &self.tau_grid {
                None => return bad("`g2_tau` needs a tau grid".into()),
                Some(t) if t.is_empty() => return bad("tau grid is empty".into()),
                Some(t) if t.iter().any(|x| !x.is_finite() || *x < 0.0) || t.windows(2).any(|w| w[1] < w[0]) => {
                    return bad("tau grid must be finite, non-negative and ascending".into())
                }
                _ => {}
            }
        }
        if self.truncation.mech_cutoff < 2 || self.truncation.cavity_cutoff < 2 {
            return bad("cutoffs must be at least 2".into());
        }
        Ok(())
    }

    fn check_param(&self, p: Param) -> Result<(), SweepError> {
        if p.readout_only() && self.model != ModelKind::ThreeMode {
            return Err(SweepError::Invalid(format!(
                "parameter `{p}` belongs to the three-mode model"
            )));
        }
        Ok(())
    }

    /// Parameters at flat grid index `k` (row-major, first axis outermost).
    pub fn point(&self, mut k: usize) -> ParamSet {
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = k % axis.values.len();
            k /= axis.values.len();
        }
        let mut ps = self.baseline;
        for (axis, &i) in self.axes.iter().zip(&idx) {
            ps.set(axis.param, axis.values[i]);
        }
        for link in &self.links {
            if let Some(v) = ps.get(link.source) {
                let v = if link.abs { v.abs() } else { v };
                ps.set(link.target, link.factor * v);
            }
        }
        ps
    }

    /// Output column names in CSV order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.axes.iter().map(|a| a.param.name().to_string()).collect();
        names.extend(self.links.iter().map(|l| l.target.name().to_string()));
        if let QubitDrive::Optimal(_) = self.drive {
            names.push("omega".into());
            names.push("phi".into());
        }
        for o in &self.outputs {
            match o {
                Output::G2Tau => {
                    let n = self.tau_grid.as_ref().map_or(0, Vec::len);
                    names.extend((0..n).map(|k| format!("g2_tau_{k}")));
                }
                Output::EtaPhiRoots => {
                    for s in ["plus", "minus"] {
                        names.push(format!("eta_{s}"));
                        names.push(format!("phi_{s}"));
                        names.push(format!("z_{s}_re"));
                        names.push(format!("z_{s}_im"));
                    }
                }
                o => names.push(o.name().into()),
            }
        }
        names.extend(["residual", "cutoff_change", "converged", "status"].map(String::from));
        names
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Text(String),
    Missing,
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub wall_time: Duration,
    pub failed_points: usize,
    pub unconverged_points: usize,
    /// Largest relative steady-state residual over all successful points.
    pub max_residual: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub columns: Vec<Column>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.cells.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Numeric values of column `name`; failed points are `None`.
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        self.column(name).map(|c| c.cells.iter().map(Cell::num).collect())
    }
}

/// Steady state and observables at one parameter point.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub space: HilbertSpace,
    pub liouvillian: Liouvillian,
    pub state: DensityMatrix,
    /// `max |L ρ| / max |L_ij|`.
    pub residual: f64,
}

impl PointSolution {
    pub fn n_b(&self) -> blockade_core::Result<f64> {
        mean_occupation(&self.state, &lowering(&self.space, MECHANICAL)?)
    }

    pub fn g2_b(&self) -> blockade_core::Result<f64> {
        g2_zero(&self.state, &lowering(&self.space, MECHANICAL)?)
    }

    pub fn g2_a(&self) -> blockade_core::Result<f64> {
        g2_zero(&self.state, &lowering(&self.space, CAVITY)?)
    }

    pub fn qubit_excitation(&self) -> blockade_core::Result<f64> {
        Ok(self.state.expectation(&number(&self.space, QUBIT)?)?.re)
    }

    pub fn g2_tau(&self, tau: &[f64]) -> blockade_core::Result<Vec<(f64, f64)>> {
        g2_tau(&self.liouvillian, &self.state, &lowering(&self.space, MECHANICAL)?, tau)
    }
}

/// Applies the qubit-drive rule to a resolved parameter set.
pub fn resolve_drive(ps: &ParamSet, drive: QubitDrive) -> blockade_core::Result<ParamSet> {
    let mut ps = *ps;
    if let QubitDrive::Optimal(branch) = drive {
        let delta_opt = ps.delta_opt.ok_or(blockade_core::Error::InvalidParameter {
            name: "delta_opt",
            reason: "not set".into(),
        })?;
        let roots = optimal_drive_roots(delta_opt, ps.mq.j, ps.mq.kappa, ps.mq.gamma)?;
        ps.mq = roots.drive(branch, ps.mq);
    }
    Ok(ps)
}

/// Builds and solves the model at `ps` with the given cutoffs.
pub fn solve_point(kind: ModelKind, ps: &ParamSet, mech_cutoff: usize, cavity_cutoff: usize) -> blockade_core::Result<PointSolution> {
    let (space, h, collapses) = match kind {
        ModelKind::TwoMode => {
            let s = two_mode_space(mech_cutoff)?;
            let p = ps.mq.validated()?;
            (s.clone(), p.hamiltonian(&s)?, p.collapse_ops(&s)?)
        }
        ModelKind::ThreeMode => {
            let s = three_mode_space(cavity_cutoff, mech_cutoff)?;
            let p = ps.detection().validated()?;
            (s.clone(), p.hamiltonian(&s)?, p.collapse_ops(&s)?)
        }
    };
    let liouvillian = build_liouvillian(&h, &collapses)?;
    let state = steady_state(&liouvillian)?;
    let lx = liouvillian.apply(&state)?;
    let residual = lx.iter().map(|v| v.norm()).fold(0.0, f64::max) / liouvillian.max_abs();
    Ok(PointSolution {
        space,
        liouvillian,
        state,
        residual,
    })
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

fn evaluate(spec: &SweepSpec, k: usize) -> (Vec<Cell>, Option<blockade_core::Error>, Option<f64>, bool) {
    let raw = spec.point(k);
    let mut row: Vec<Cell> = spec
        .axes
        .iter()
        .map(|a| a.param)
        .chain(spec.links.iter().map(|l| l.target))
        .map(|p| raw.get(p).map_or(Cell::Missing, Cell::Num))
        .collect();
    let tail = spec.column_names().len() - row.len();
    let fail = |mut row: Vec<Cell>, e: blockade_core::Error| {
        row.resize(row.len() + tail - 1, Cell::Missing);
        row.push(Cell::Text(e.code().into()));
        (row, Some(e), None, false)
    };

    let ps = match resolve_drive(&raw, spec.drive) {
        Ok(ps) => ps,
        Err(e) => return fail(row, e),
    };
    if let QubitDrive::Optimal(_) = spec.drive {
        row.push(Cell::Num(ps.mq.omega));
        row.push(Cell::Num(ps.mq.phi));
    }

    let needs_state = spec.outputs.iter().any(|o| o.needs_state());
    let t = spec.truncation;
    let solution = if needs_state {
        match solve_point(spec.model, &ps, t.mech_cutoff, t.cavity_cutoff) {
            Ok(s) => Some(s),
            Err(e) => return fail(row, e),
        }
    } else {
        None
    };

    let mut outputs = Vec::new();
    let result: blockade_core::Result<()> = (|| {
        for o in &spec.outputs {
            match o {
                Output::G2Zero => outputs.push(Cell::Num(solution.as_ref().unwrap().g2_b()?)),
                Output::NB => outputs.push(Cell::Num(solution.as_ref().unwrap().n_b()?)),
                Output::G2aZero => outputs.push(Cell::Num(solution.as_ref().unwrap().g2_a()?)),
                Output::G2Tau => {
                    let tau = spec.tau_grid.as_deref().unwrap_or(&[]);
                    for (_, g) in solution.as_ref().unwrap().g2_tau(tau)? {
                        outputs.push(Cell::Num(g));
                    }
                }
                Output::EtaPhiRoots => {
                    let d = ps.delta_opt.unwrap_or(f64::NAN);
                    let roots = optimal_drive_roots(d, ps.mq.j, ps.mq.kappa, ps.mq.gamma)?;
                    for b in [Branch::Plus, Branch::Minus] {
                        let z = roots.root(b);
                        outputs.extend([roots.eta(b), roots.phi(b), z.re, z.im].map(Cell::Num));
                    }
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        return fail(row, e);
    }
    row.extend(outputs);

    let (residual, change) = match &solution {
        None => (Cell::Missing, Ok(0.0)),
        Some(s) => {
            let change = if t.convergence_check {
                convergence_change(spec, &ps, s)
            } else {
                Ok(0.0)
            };
            (Cell::Num(s.residual), change)
        }
    };
    let residual_value = residual.num();
    row.push(residual);
    match change {
        Ok(c) => {
            let converged = c < CONVERGENCE_TOL;
            row.push(if t.convergence_check && solution.is_some() {
                Cell::Num(c)
            } else {
                Cell::Missing
            });
            row.push(Cell::Flag(converged));
            row.push(Cell::Text("ok".into()));
            (row, None, residual_value, converged)
        }
        Err(e) => {
            log::debug!("point {k}: convergence check failed: {e}");
            row.push(Cell::Missing);
            row.push(Cell::Flag(false));
            row.push(Cell::Text("ok".into()));
            (row, None, residual_value, false)
        }
    }
}

/// Largest relative change of the requested equal-time correlations when the
/// mechanical cutoff is raised by [`CUTOFF_STEP`] (and the cavity cutoff by
/// one in the three-mode model).
fn convergence_change(spec: &SweepSpec, ps: &ParamSet, base: &PointSolution) -> blockade_core::Result<f64> {
    let t = spec.truncation;
    let cavity = match spec.model {
        ModelKind::TwoMode => t.cavity_cutoff,
        ModelKind::ThreeMode => t.cavity_cutoff + 1,
    };
    let bigger = solve_point(spec.model, ps, t.mech_cutoff + CUTOFF_STEP, cavity)?;
    let mut change = relative_change(base.g2_b()?, bigger.g2_b()?);
    if spec.outputs.contains(&Output::G2aZero) {
        change = change.max(relative_change(base.g2_a()?, bigger.g2_a()?));
    }
    Ok(change)
}

/// Runs every grid point and assembles the table in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let start = Instant::now();
    let n = spec.len();
    log::info!("sweep `{}`: {} points", spec.name, n);
    let rows: Vec<_> = (0..n).into_par_iter().map(|k| evaluate(spec, k)).collect();

    let names = spec.column_names();
    let mut columns: Vec<Column> = names
        .into_iter()
        .map(|name| Column {
            name,
            cells: Vec::with_capacity(n),
        })
        .collect();
    let mut failed = 0;
    let mut unconverged = 0;
    let mut max_residual = 0.0f64;
    let mut first_error = None;
    for (k, (row, err, residual, converged)) in rows.into_iter().enumerate() {
        debug_assert_eq!(row.len(), columns.len());
        if let Some(e) = err {
            log::warn!("sweep `{}`: point {k} failed: {e}", spec.name);
            failed += 1;
            first_error.get_or_insert(e);
        } else if !converged {
            unconverged += 1;
        }
        if let Some(r) = residual {
            max_residual = max_residual.max(r);
        }
        for (col, cell) in columns.iter_mut().zip(row) {
            col.cells.push(cell);
        }
    }
    if failed == n {
        return Err(SweepError::AllFailed(n, first_error.expect("at least one point")));
    }
    if unconverged > 0 {
        log::warn!("sweep `{}`: {unconverged} points did not pass the cutoff check", spec.name);
    }
    Ok(SweepResult {
        columns,
        metadata: SweepMetadata {
            spec: spec.clone(),
            wall_time: start.elapsed(),
            failed_points: failed,
            unconverged_points: unconverged,
            max_residual,
            threads: rayon::current_num_threads(),
        },
    })
}
