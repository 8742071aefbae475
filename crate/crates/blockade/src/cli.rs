//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage, config and file errors, 2 when a
//! solve fails numerically (including sweeps with failed points, which are
//! still written).

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use blockade_core::analytics::{no_qubit_drive_optimum, optimal_drive_roots, thermal_occupation, Branch};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_with_overrides, ConfigError, Kind, OutputSection, RunConfig};
use crate::output::{format_cell, write_sweep};
use crate::presets::{figure_preset_with, fig11_detection, DEFAULT_POINTS};
use crate::sweep::{
    linspace, resolve_drive, run_sweep, solve_point, Cell, ModelKind, ParamSet, QubitDrive, SweepError, SweepResult, Truncation,
};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "BLOCKADE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "blockade", version, about = "Phonon blockade in a driven resonator-qubit system")]
struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML run config.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set model.J=0.71`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the steady state at the configured point and print a summary.
    Steady(ConfigArgs),
    /// Write g2(tau) at the configured point as CSV.
    G2tau(ConfigArgs),
    /// Run the sweep described by the config's [task] table.
    Sweep(ConfigArgs),
    /// Run a figure preset and write one CSV per panel.
    Figure {
        /// fig2 ... fig11
        name: String,
        /// Points per continuous axis.
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// Print the optimal coupling without qubit drive and the two-drive roots.
    Optimal {
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Coupling used for the root table.
        #[arg(long, default_value_t = 3.0)]
        j: f64,
        #[arg(long, default_value_t = -9.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 9.0, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
    /// Bose-Einstein occupation of a mode (SI units).
    Thermal {
        /// Frequency in Hz.
        #[arg(long)]
        freq: f64,
        /// Temperature in K.
        #[arg(long)]
        temp: f64,
    },
    /// Compare cavity and phonon correlations in the three-mode model.
    Detect(ConfigArgs),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(format!("config error: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

impl From<blockade_core::Error> for Failure {
    fn from(e: blockade_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(format!("numerical failure: {e}"))
        } else {
            Failure::Usage(format!("invalid input: {e}"))
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::AllFailed(..) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Numerical(m)) = &f;
            eprintln!("error: {m}");
            f.code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

fn read_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let cfg = parse_with_overrides(&text, &args.overrides).map_err(|e| match &args.config {
        Some(p) => ConfigError(format!("{}: {}", p.display(), e.0)),
        None => e,
    })?;
    Ok(cfg)
}

fn out_dir(configured: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from(configured),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Steady(args) => steady(&read_config(&args)?),
        Command::G2tau(args) => g2tau(&read_config(&args)?),
        Command::Sweep(args) => {
            if args.config.is_none() {
                return Err(Failure::Usage("sweep needs --config".into()));
            }
            let cfg = read_config(&args)?;
            let spec = cfg.to_sweep_spec()?;
            let result = run_sweep(&spec)?;
            finish_sweep(&result, &cfg.output)
        }
        Command::Figure { name, points } => {
            let panels = figure_preset_with(&name, points)?;
            let output = OutputSection::default();
            let mut failure = None;
            for spec in panels {
                let result = run_sweep(&spec)?;
                if let Err(f) = finish_sweep(&result, &output) {
                    failure.get_or_insert(f);
                }
            }
            failure.map_or(Ok(()), Err)
        }
        Command::Optimal {
            kappa,
            gamma,
            j,
            from,
            to,
            points,
        } => optimal(kappa, gamma, j, from, to, points),
        Command::Thermal { freq, temp } => {
            if !(freq.is_finite() && freq > 0.0 && temp.is_finite() && temp >= 0.0) {
                return Err(Failure::Usage("--freq must be positive and --temp non-negative".into()));
            }
            println!("n_th = {:.6e}", thermal_occupation(freq, temp));
            Ok(())
        }
        Command::Detect(args) => detect(&args),
    }
}

fn finish_sweep(result: &SweepResult, output: &OutputSection) -> Result<(), Failure> {
    let dir = out_dir(&output.dir);
    let written = write_sweep(result, &dir, output)?;
    let m = &result.metadata;
    println!(
        "{}: {} rows, {} failed, {} unconverged, {:.2} s",
        written.csv.display(),
        result.rows(),
        m.failed_points,
        m.unconverged_points,
        m.wall_time.as_secs_f64()
    );
    for p in [Some(&written.meta), written.tau.as_ref(), written.plot.as_ref()].into_iter().flatten() {
        println!("{}", p.display());
    }
    if m.failed_points > 0 {
        return Err(Failure::Numerical(format!(
            "sweep `{}`: {} of {} points failed (marked NA)",
            m.spec.name,
            m.failed_points,
            result.rows()
        )));
    }
    Ok(())
}

fn point(cfg: &RunConfig) -> Result<(ModelKind, ParamSet), Failure> {
    let ps = resolve_drive(&cfg.baseline()?, cfg.drive())?;
    Ok((cfg.model_kind(), ps))
}

fn steady(cfg: &RunConfig) -> Result<(), Failure> {
    let (kind, ps) = point(cfg)?;
    let t = cfg.truncation();
    let s = solve_point(kind, &ps, t.mech_cutoff, t.cavity_cutoff)?;
    let mut lines = vec![format!("dimension = {}", s.space.total_dim())];
    if cfg.drive() != QubitDrive::Fixed {
        lines.push(format!("omega = {:.12e}", ps.mq.omega));
        lines.push(format!("phi = {:.12e}", ps.mq.phi));
    }
    lines.push(format!("n_b = {:.12e}", s.n_b()?));
    lines.push(format!("g2_zero = {:.12e}", s.g2_b()?));
    lines.push(format!("qubit_excitation = {:.12e}", s.qubit_excitation()?));
    if kind == ModelKind::ThreeMode {
        lines.push(format!("g2a_zero = {:.12e}", s.g2_a()?));
    }
    lines.push(format!("relative_residual = {:.3e}", s.residual));
    println!("{}", lines.join("\n"));
    Ok(())
}

fn g2tau(cfg: &RunConfig) -> Result<(), Failure> {
    let (kind, ps) = point(cfg)?;
    let t = cfg.truncation();
    let tau = cfg
        .tau_grid()?
        .unwrap_or_else(|| linspace(0.0, 3.0 * std::f64::consts::TAU, DEFAULT_POINTS));
    if tau.iter().any(|x| !x.is_finite() || *x < 0.0) || tau.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::Usage("task.tau must be finite, non-negative and ascending".into()));
    }
    let s = solve_point(kind, &ps, t.mech_cutoff, t.cavity_cutoff)?;
    let series = s.g2_tau(&tau)?;
    let dir = out_dir(&cfg.output.dir);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}.g2tau.csv", cfg.output.name));
    write_series(&path, &series)?;
    println!("{}", path.display());
    Ok(())
}

fn write_series(path: &Path, series: &[(f64, f64)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = std::iter::once(["tau".to_string(), "g2_tau".to_string()])
        .chain(series.iter().map(|&(t, g)| [format_cell(&Cell::Num(t)), format_cell(&Cell::Num(g))]));
    for r in rows {
        w.write_record(&r).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn optimal(kappa: f64, gamma: f64, j: f64, from: f64, to: f64, points: usize) -> Result<(), Failure> {
    if !(kappa > 0.0 && gamma >= 0.0 && kappa.is_finite() && gamma.is_finite()) {
        return Err(Failure::Usage("--kappa must be positive and --gamma non-negative".into()));
    }
    if points == 0 || !from.is_finite() || !to.is_finite() || !(j.is_finite() && j > 0.0) {
        return Err(Failure::Usage("root table needs --j > 0, a finite range and at least one point".into()));
    }
    let (d_opt, j_opt) = no_qubit_drive_optimum(kappa, gamma);
    let mut out = std::io::stdout().lock();
    writeln!(out, "without qubit drive: delta_opt = {d_opt:.4}, J_opt = {j_opt:.4}")?;
    writeln!(out, "two-drive roots at J = {j}:")?;
    writeln!(out, "{:>10} {:>12} {:>12} {:>12} {:>12}", "delta_opt", "eta_plus", "phi_plus", "eta_minus", "phi_minus")?;
    for d in linspace(from, to, points) {
        let r = optimal_drive_roots(d, j, kappa, gamma)?;
        writeln!(
            out,
            "{d:>10.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.eta(Branch::Plus),
            r.phi(Branch::Plus),
            r.eta(Branch::Minus),
            r.phi(Branch::Minus)
        )?;
    }
    Ok(())
}

fn detect(args: &ConfigArgs) -> Result<(), Failure> {
    let (ps, t) = if args.config.is_none() && args.overrides.is_empty() {
        let mut ps = ParamSet::from_detection(fig11_detection());
        ps.mq.delta = 3.0;
        ps.delta_opt = Some(3.0);
        let ps = resolve_drive(&ps, QubitDrive::Optimal(Branch::Plus))?;
        (ps, Truncation::default_for(ModelKind::ThreeMode))
    } else {
        let cfg = read_config(args)?;
        if cfg.model.kind != Kind::ThreeMode {
            return Err(Failure::Usage("detect needs model.kind = \"three_mode\"".into()));
        }
        (point(&cfg)?.1, cfg.truncation())
    };
    let three = solve_point(ModelKind::ThreeMode, &ps, t.mech_cutoff, t.cavity_cutoff)?;
    let two = solve_point(ModelKind::TwoMode, &ps, t.mech_cutoff, t.cavity_cutoff)?;
    let (ga, gb, gb2) = (three.g2_a()?, three.g2_b()?, two.g2_b()?);
    let n_b = three.n_b()?;
    println!("g2a_zero (cavity) = {ga:.12e}");
    println!("g2_zero (phonons, three-mode) = {gb:.12e}");
    println!("g2_zero (phonons, two-mode) = {gb2:.12e}");
    println!("relative difference cavity vs phonons = {:.4e}", (ga - gb).abs() / gb);
    println!("relative difference three- vs two-mode = {:.4e}", (gb - gb2).abs() / gb2);
    println!("n_b = {n_b:.12e}");
    Ok(())
}
