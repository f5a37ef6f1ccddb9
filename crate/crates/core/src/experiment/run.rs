use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bounds::{certify, BoundsReport};
use crate::diff::{Algorithm, DiffState, GainConfig};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::signal::SignalSpec;
use crate::sim::{euler_simulate, settling_time, Trace};

use super::config::{ic_label, ExperimentConfig};
use super::plot::{emit_plot, PlotLayout, PlotPanel};

/// File names inside the output directory.
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SUMMARY_KV: &str = "summary.kv";
pub const BOUNDS_TXT: &str = "bounds.txt";
pub const BOUNDS_KV: &str = "bounds.kv";
pub const PLOT_SCRIPT: &str = "plot.py";
pub const PLOT_IMAGE: &str = "figure.png";
pub const CONFIG_COPY: &str = "config.ini";

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Aborted at this time; the partial trace is kept.
    Diverged(f64),
    Failed(String),
}

impl CellStatus {
    fn key(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Diverged(_) => "diverged",
            CellStatus::Failed(_) => "failed",
        }
    }
}

/// Per-cell measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub ic: DiffState,
    pub status: CellStatus,
    /// CSV file name relative to the output directory, if written.
    pub csv: Option<String>,
    pub settling: Option<f64>,
    /// `Tc - (settling - t0)`.
    pub slack: Option<f64>,
    pub max_e1: f64,
    pub max_e2: f64,
    /// `|e1|` at the sample nearest the deadline, if the run reached it.
    pub e1_at_deadline: Option<f64>,
    /// `max |e1|` from the deadline to the end of the run.
    pub max_e1_after_deadline: Option<f64>,
    pub switched_at: Option<f64>,
    pub cap_engaged_at: Option<f64>,
    /// The run was stopped just before the deadline because the law has no
    /// branch past it.
    pub truncated: bool,
    pub end_time: f64,
}

/// One simulated cell with its trace.
#[derive(Debug, Clone)]
pub struct Cell {
    pub summary: CellSummary,
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub bounds: BoundsReport,
    pub cells: Vec<Cell>,
}

impl ExperimentOutcome {
    pub fn certified(&self) -> bool {
        self.bounds.is_certified()
    }

    pub fn any_diverged(&self) -> bool {
        self.cells.iter().any(|c| matches!(c.summary.status, CellStatus::Diverged(_)))
    }

    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(|c| matches!(c.summary.status, CellStatus::Failed(_)))
    }
}

/// Certifies the bound family of `cfg` on its grids.
pub fn certify_config(cfg: &ExperimentConfig, exec: Exec) -> Result<BoundsReport> {
    let s = cfg.signal_spec()?;
    certify(&s, cfg.tbg, cfg.script_m, cfg.horizon, cfg.dt, cfg.grid, exec)
}

/// Simulates one `(algorithm, ic)` cell. Errors other than divergence end up
/// in the status.
pub fn run_cell(cfg: &ExperimentConfig, signal: &SignalSpec, gc: &GainConfig, alg: Algorithm, ic: DiffState) -> Cell {
    let mut sc = cfg.sim_config(ic);
    let deadline = cfg.tbg.deadline();
    let truncated = alg.needs_cap_past_deadline() && sc.cap.is_none() && sc.horizon >= deadline;
    if truncated {
        sc.horizon = deadline - sc.dt;
    }
    let (status, trace) = match euler_simulate(alg, signal, gc, &sc) {
        Ok(tr) => (CellStatus::Ok, Some(tr)),
        Err(Error::Diverged { at, partial }) => (CellStatus::Diverged(at), Some(*partial)),
        Err(e) => (CellStatus::Failed(e.to_string()), None),
    };
    let mut summary = CellSummary {
        algorithm: alg,
        ic,
        status,
        csv: None,
        settling: None,
        slack: None,
        max_e1: f64::NAN,
        max_e2: f64::NAN,
        e1_at_deadline: None,
        max_e1_after_deadline: None,
        switched_at: None,
        cap_engaged_at: None,
        truncated,
        end_time: cfg.tbg.t0,
    };
    if let Some(tr) = &trace {
        let end = tr.last().map_or(cfg.tbg.t0, |r| r.t);
        let (m1, m2) = tr.max_errors(f64::NEG_INFINITY, f64::INFINITY);
        summary.max_e1 = m1;
        summary.max_e2 = m2;
        summary.end_time = end;
        summary.switched_at = tr.switched_at;
        summary.cap_engaged_at = tr.cap_engaged_at;
        if summary.status == CellStatus::Ok {
            summary.settling = settling_time(tr);
            summary.slack = summary.settling.map(|ts| cfg.tbg.tc - (ts - cfg.tbg.t0));
        }
        let half_step = 0.5 * cfg.dt * cfg.record_stride as f64;
        if end >= deadline - half_step {
            summary.e1_at_deadline = tr.at(deadline).map(|r| r.e1.abs());
            summary.max_e1_after_deadline = Some(tr.max_errors(deadline - half_step, f64::INFINITY).0);
        }
    }
    Cell { summary, trace }
}

/// Certifies, then runs every `(algorithm, ic)` cell. Cells run through
/// `exec`; results come back in config order. Nothing is simulated when the
/// certification fails.
pub fn run_cells(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentOutcome> {
    let bounds = certify_config(cfg, exec)?;
    if !bounds.is_certified() {
        return Ok(ExperimentOutcome {
            bounds,
            cells: Vec::new(),
        });
    }
    let signal = cfg.signal_spec()?;
    let gc = cfg.gain_config()?;
    let grid: Vec<(Algorithm, DiffState)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.ics.iter().map(move |&ic| (a, ic)))
        .collect();
    let cells = exec.map_slice(&grid, |&(alg, ic)| run_cell(cfg, &signal, &gc, alg, ic));
    Ok(ExperimentOutcome { bounds, cells })
}

/// CSV file name of a cell.
pub fn cell_file_name(alg: Algorithm, ic: &DiffState) -> String {
    format!("{}_ic{}.csv", alg.id(), ic_label(ic))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn sci(v: f64) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.3e}")
    }
}

fn kv(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"))
}

/// Human-readable summary table.
pub fn summary_text(cfg: &ExperimentConfig, cells: &[Cell]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", cfg.name);
    let _ = writeln!(
        s,
        "signal: {}  t0 = {}  Tc = {}  alpha = {}  script M = {}  dt = {}  horizon = {}",
        cfg.signal, cfg.tbg.t0, cfg.tbg.tc, cfg.tbg.alpha, cfg.script_m, cfg.dt, cfg.horizon
    );
    let _ = writeln!(s, "deadline t0 + Tc = {}", cfg.tbg.deadline());
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<11} {:>12} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "algorithm", "ic", "status", "settling", "slack", "max|e1|", "max|e2|", "|e1(Tc)|", "post|e1|", "switch", "cap"
    );
    for c in cells {
        let m = &c.summary;
        let status = match (&m.status, m.truncated) {
            (CellStatus::Ok, true) => "truncated".to_string(),
            (st, _) => st.key().to_string(),
        };
        let _ = writeln!(
            s,
            "{:<11} {:>12} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            m.algorithm.id(),
            ic_label(&m.ic),
            status,
            opt(m.settling),
            opt(m.slack),
            sci(m.max_e1),
            sci(m.max_e2),
            m.e1_at_deadline.map_or("-".into(), sci),
            m.max_e1_after_deadline.map_or("-".into(), sci),
            opt(m.switched_at),
            opt(m.cap_engaged_at),
        );
    }
    let notes: Vec<String> = cells
        .iter()
        .filter_map(|c| match &c.summary.status {
            CellStatus::Diverged(at) => Some(format!(
                "{} ic {} diverged at t = {at:.6}",
                c.summary.algorithm,
                ic_label(&c.summary.ic)
            )),
            CellStatus::Failed(e) => Some(format!("{} ic {} failed: {e}", c.summary.algorithm, ic_label(&c.summary.ic))),
            CellStatus::Ok if c.summary.truncated => Some(format!(
                "{} ic {} stopped at t = {:.6} (no branch past the deadline; set a cap to continue)",
                c.summary.algorithm,
                ic_label(&c.summary.ic),
                c.summary.end_time
            )),
            CellStatus::Ok => None,
        })
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(s);
        for n in notes {
            let _ = writeln!(s, "note: {n}");
        }
    }
    s
}

/// Machine-readable summary, one `key=value` per line.
pub fn summary_kv(cfg: &ExperimentConfig, cells: &[Cell]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment={}", cfg.name);
    let _ = writeln!(s, "signal={}", cfg.signal);
    let _ = writeln!(s, "deadline={:e}", cfg.tbg.deadline());
    let _ = writeln!(s, "cells={}", cells.len());
    for c in cells {
        let m = &c.summary;
        let p = format!("{}.ic{}", m.algorithm.id(), ic_label(&m.ic));
        let _ = writeln!(s, "{p}.status={}", m.status.key());
        if let CellStatus::Diverged(at) = m.status {
            let _ = writeln!(s, "{p}.diverged_at={at:e}");
        }
        let _ = writeln!(s, "{p}.truncated={}", m.truncated);
        let _ = writeln!(s, "{p}.csv={}", m.csv.as_deref().unwrap_or("none"));
        let _ = writeln!(s, "{p}.settling={}", kv(m.settling));
        let _ = writeln!(s, "{p}.slack={}", kv(m.slack));
        let _ = writeln!(s, "{p}.max_e1={}", kv((!m.max_e1.is_nan()).then_some(m.max_e1)));
        let _ = writeln!(s, "{p}.max_e2={}", kv((!m.max_e2.is_nan()).then_some(m.max_e2)));
        let _ = writeln!(s, "{p}.e1_at_deadline={}", kv(m.e1_at_deadline));
        let _ = writeln!(s, "{p}.max_e1_after_deadline={}", kv(m.max_e1_after_deadline));
        let _ = writeln!(s, "{p}.switched_at={}", kv(m.switched_at));
        let _ = writeln!(s, "{p}.cap_engaged_at={}", kv(m.cap_engaged_at));
        let _ = writeln!(s, "{p}.end_time={:e}", m.end_time);
    }
    s
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| Error::io(p, e))
}

/// Plot script for the cells that have a trace: rows are algorithms, columns
/// are initial conditions. `None` when there is nothing to draw.
pub fn plot_script(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Option<String>> {
    let panels: Vec<PlotPanel<'_>> = cells
        .iter()
        .filter_map(|c| {
            let tr = c.trace.as_ref().filter(|t| !t.is_empty())?;
            let row = cfg.algorithms.iter().position(|&a| a == c.summary.algorithm)?;
            let col = cfg.ics.iter().position(|ic| *ic == c.summary.ic)?;
            Some(PlotPanel {
                row,
                col,
                title: format!("{}, z0(t0) = {}", c.summary.algorithm, ic_label(&c.summary.ic)),
                csv: c.summary.csv.clone()?,
                trace: tr,
            })
        })
        .collect();
    if panels.is_empty() {
        return Ok(None);
    }
    let layout = PlotLayout {
        title: cfg.name.clone(),
        rows: cfg.algorithms.len(),
        cols: cfg.ics.len(),
        deadline: Some(cfg.tbg.deadline()),
        output: PLOT_IMAGE.into(),
    };
    emit_plot(&panels, &layout).map(Some)
}

/// Writes the bounds report, cell CSVs, summaries, the plot script and a
/// canonical copy of the config into `dir`.
pub fn write_artifacts(cfg: &ExperimentConfig, outcome: &mut ExperimentOutcome, dir: &Path, exec: Exec) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, CONFIG_COPY, &cfg.to_ini_string())?;
    write(dir, BOUNDS_TXT, &outcome.bounds.to_string())?;
    write(dir, BOUNDS_KV, &outcome.bounds.to_kv())?;
    if !outcome.certified() {
        return Ok(());
    }
    let written: Vec<Result<Option<String>>> = exec.map_slice(&outcome.cells, |c| match &c.trace {
        Some(tr) => {
            let name = cell_file_name(c.summary.algorithm, &c.summary.ic);
            tr.save_csv(&dir.join(&name)).map(|_| Some(name))
        }
        None => Ok(None),
    });
    for (c, w) in outcome.cells.iter_mut().zip(written) {
        c.summary.csv = w?;
    }
    write(dir, SUMMARY_TXT, &summary_text(cfg, &outcome.cells))?;
    write(dir, SUMMARY_KV, &summary_kv(cfg, &outcome.cells))?;
    if let Some(script) = plot_script(cfg, &outcome.cells)? {
        write(dir, PLOT_SCRIPT, &script)?;
    }
    Ok(())
}

/// Output directory: `explicit`, then the config's `[output] dir`, then
/// `out/<name>`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(&cfg.name))
}

/// Certifies, runs and writes everything.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path, exec: Exec) -> Result<ExperimentOutcome> {
    let mut outcome = run_cells(cfg, exec)?;
    write_artifacts(cfg, &mut outcome, dir, exec)?;
    Ok(outcome)
}
