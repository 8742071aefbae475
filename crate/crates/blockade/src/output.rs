//! CSV tables, run metadata and gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::{OutputSection, RunConfig};
use crate::sweep::{Cell, Output, SweepResult};

/// Marker written for failed or undefined values.
pub const MISSING: &str = "NA";

/// Text form of one cell. Numbers keep 17 significant digits, enough to
/// round-trip an `f64`.
pub fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
        Cell::Num(_) | Cell::Missing => MISSING.into(),
        Cell::Flag(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(result.columns.iter().map(|c| c.name.as_str()))
        .expect("in-memory write");
    for r in 0..result.rows() {
        w.write_record(result.columns.iter().map(|c| format_cell(&c.cells[r])))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// `tau` down the rows, one column per grid point. `None` when the sweep
/// has no `g2_tau` output.
pub fn tau_table(result: &SweepResult) -> Option<String> {
    let spec = &result.metadata.spec;
    if !spec.outputs.contains(&Output::G2Tau) {
        return None;
    }
    let tau = spec.tau_grid.as_ref()?;
    let columns = (0..tau.len())
        .map(|k| result.column(&format!("g2_tau_{k}")))
        .collect::<Option<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("tau".to_string()).chain((0..result.rows()).map(|r| format!("point_{r}")));
    w.write_record(header).expect("in-memory write");
    for (t, col) in tau.iter().zip(columns) {
        let row = std::iter::once(format_cell(&Cell::Num(*t))).chain(col.cells.iter().map(format_cell));
        w.write_record(row).expect("in-memory write");
    }
    Some(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"))
}

/// The resolved job as a loadable config, preceded by run statistics as
/// comments.
pub fn metadata_toml(result: &SweepResult, output: &OutputSection) -> String {
    let m = &result.metadata;
    let config = RunConfig::from_sweep_spec(&m.spec, output);
    let mut out = String::new();
    let _ = writeln!(out, "# blockade {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# rows = {}", result.rows());
    let _ = writeln!(out, "# failed_points = {}", m.failed_points);
    let _ = writeln!(out, "# unconverged_points = {}", m.unconverged_points);
    let _ = writeln!(out, "# max_relative_residual = {:e}", m.max_residual);
    let _ = writeln!(out, "# wall_time_s = {:.3}", m.wall_time.as_secs_f64());
    let _ = writeln!(out, "# threads = {}", m.threads);
    out.push_str(&config.to_toml());
    out
}

/// Gnuplot script for a sweep table. One axis plots every output against
/// it; two axes draw the first requested output as a map when both axes are
/// dense, and as one curve per outer value otherwise.
pub fn gnuplot_script(result: &SweepResult, csv_file: &str) -> String {
    let spec = &result.metadata.spec;
    let names: Vec<&str> = result.columns.iter().map(|c| c.name.as_str()).collect();
    let col = |n: &str| names.iter().position(|c| *c == n).map(|i| i + 1);
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {csv_file}");
    s.push_str("set datafile separator ','\nset datafile missing 'NA'\nset key outside\n");
    let ys: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| {
            ["g2_zero", "g2a_zero", "n_b", "eta_plus", "eta_minus", "phi_plus", "phi_minus"].contains(n)
        })
        .collect();
    let inner = spec.axes.last().expect("validated sweep has axes");
    let xname = inner.param.name();
    let _ = writeln!(s, "set xlabel '{xname}'");
    if ys.iter().any(|y| y.starts_with("g2")) {
        s.push_str("set logscale y\n");
    }
    if tau_table(result).is_some() {
        let _ = writeln!(s, "# g2(tau) curves are in the companion .tau.csv file");
    }
    match spec.axes.as_slice() {
        [_] => {
            let plots: Vec<String> = ys
                .iter()
                .map(|y| format!("'{csv_file}' skip 1 using {}:{} with lines title '{y}'", col(xname).unwrap(), col(y).unwrap()))
                .collect();
            if !plots.is_empty() {
                let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
            }
        }
        [outer, inner] => {
            let Some(y) = ys.first() else { return s };
            let n = inner.values.len();
            let (cx, cy, co) = (col(xname).unwrap(), col(y).unwrap(), col(outer.param.name()).unwrap());
            if outer.values.len() > 8 {
                s.push_str("unset logscale y\nset view map\nset pm3d map\nset logscale cb\n");
                let _ = writeln!(s, "set ylabel '{}'", outer.param.name());
                let _ = writeln!(s, "set cblabel '{y}'");
                let _ = writeln!(s, "splot '{csv_file}' skip 1 using {cx}:{co}:{cy} with pm3d notitle");
            } else {
                let _ = writeln!(s, "set ylabel '{y}'");
                let _ = writeln!(
                    s,
                    "plot for [k=0:{}] '{csv_file}' skip 1 every ::(k*{n})::(k*{n}+{}) using {cx}:{cy} with lines title sprintf('{} #%d', k)",
                    outer.values.len() - 1,
                    n - 1,
                    outer.param.name()
                );
            }
        }
        _ => {}
    }
    s.push_str("pause -1\n");
    s
}

/// Files written for one sweep.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub tau: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Writes `<name>.csv`, `<name>.meta.toml` and, when applicable,
/// `<name>.tau.csv` and `<name>.gp` into `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path, output: &OutputSection) -> io::Result<Written> {
    fs::create_dir_all(dir)?;
    let name = &result.metadata.spec.name;
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&csv, csv_string(result))?;
    let meta = dir.join(format!("{name}.meta.toml"));
    fs::write(&meta, metadata_toml(result, output))?;
    let tau = match tau_table(result) {
        Some(t) => {
            let p = dir.join(format!("{name}.tau.csv"));
            fs::write(&p, t)?;
            Some(p)
        }
        None => None,
    };
    let plot = if output.plot_script {
        let p = dir.join(format!("{name}.gp"));
        fs::write(&p, gnuplot_script(result, &format!("{name}.csv")))?;
        Some(p)
    } else {
        None
    };
    Ok(Written { csv, meta, tau, plot })
}
