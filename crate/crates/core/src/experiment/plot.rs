//! Matplotlib script generation.
//!
//! The script reads the trace CSVs next to it with the standard `csv` module
//! and draws one panel per trace: `e1` and `e2` against `t` on a symmetric-log
//! axis, with the deadline marked.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sim::Trace;

/// Relative tolerance when comparing time bases.
const TIME_BASE_TOL: f64 = 1e-9;

/// One panel: a trace and where it goes in the grid.
#[derive(Debug, Clone)]
pub struct PlotPanel<'a> {
    pub row: usize,
    pub col: usize,
    pub title: String,
    /// CSV file name, relative to the script.
    pub csv: String,
    pub trace: &'a Trace,
}

#[derive(Debug, Clone, Default)]
pub struct PlotLayout {
    pub title: String,
    pub rows: usize,
    pub cols: usize,
    /// Vertical marker, usually `t0 + Tc`.
    pub deadline: Option<f64>,
    /// Image written by the script.
    pub output: String,
}

fn check_time_base(panels: &[PlotPanel<'_>]) -> Result<()> {
    let mut base: Option<(f64, Option<f64>, &str)> = None;
    for p in panels {
        let Some(first) = p.trace.first() else {
            return Err(Error::Layout(format!("trace '{}' is empty", p.title)));
        };
        let spacing = p.trace.spacing();
        match base {
            None => base = Some((first.t, spacing, &p.title)),
            Some((t0, h0, name)) => {
                let same_start = (first.t - t0).abs() <= TIME_BASE_TOL * (1.0 + t0.abs());
                let same_step = match (h0, spacing) {
                    (Some(a), Some(b)) => (a - b).abs() <= TIME_BASE_TOL * a.abs(),
                    _ => true,
                };
                if !(same_start && same_step) {
                    return Err(Error::Layout(format!(
                        "traces '{name}' and '{}' do not share a time base",
                        p.title
                    )));
                }
            }
        }
    }
    Ok(())
}

fn py_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the plot script. Output depends only on the arguments.
pub fn emit_plot(panels: &[PlotPanel<'_>], layout: &PlotLayout) -> Result<String> {
    if panels.is_empty() {
        return Err(Error::Layout("no traces to plot".into()));
    }
    if layout.rows == 0 || layout.cols == 0 {
        return Err(Error::Layout(format!("{}x{} grid has no cells", layout.rows, layout.cols)));
    }
    for p in panels {
        if p.row >= layout.rows || p.col >= layout.cols {
            return Err(Error::Layout(format!(
                "panel '{}' at ({}, {}) is outside the {}x{} grid",
                p.title, p.row, p.col, layout.rows, layout.cols
            )));
        }
    }
    let mut seen = vec![false; layout.rows * layout.cols];
    for p in panels {
        let cell = &mut seen[p.row * layout.cols + p.col];
        if *cell {
            return Err(Error::Layout(format!("two panels at ({}, {})", p.row, p.col)));
        }
        *cell = true;
    }
    check_time_base(panels)?;

    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "# Generated by predift. Run from anywhere; CSV paths are relative to this file.");
    let _ = writeln!(s, "import csv");
    let _ = writeln!(s, "import pathlib");
    let _ = writeln!(s);
    let _ = writeln!(s, "import matplotlib");
    let _ = writeln!(s, "matplotlib.use(\"Agg\")");
    let _ = writeln!(s, "import matplotlib.pyplot as plt");
    let _ = writeln!(s);
    let _ = writeln!(s, "HERE = pathlib.Path(__file__).resolve().parent");
    let _ = writeln!(s, "ROWS, COLS = {}, {}", layout.rows, layout.cols);
    match layout.deadline {
        Some(d) => {
            let _ = writeln!(s, "DEADLINE = {d:?}");
        }
        None => {
            let _ = writeln!(s, "DEADLINE = None");
        }
    }
    let _ = writeln!(s, "PANELS = [");
    for p in panels {
        let _ = writeln!(s, "    ({}, {}, {}, {}),", p.row, p.col, py_str(&p.title), py_str(&p.csv));
    }
    let _ = writeln!(s, "]");
    let _ = writeln!(s);
    let _ = writeln!(s, "def load(name):");
    let _ = writeln!(s, "    cols = {{\"t\": [], \"e1\": [], \"e2\": []}}");
    let _ = writeln!(s, "    with open(HERE / name, newline=\"\") as f:");
    let _ = writeln!(s, "        for row in csv.DictReader(f):");
    let _ = writeln!(s, "            for k in cols:");
    let _ = writeln!(s, "                cols[k].append(float(row[k]))");
    let _ = writeln!(s, "    return cols");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "fig, axes = plt.subplots(ROWS, COLS, figsize=(4.0 * COLS, 3.0 * ROWS), squeeze=False, sharex=True)"
    );
    let _ = writeln!(s, "fig.suptitle({})", py_str(&layout.title));
    let _ = writeln!(s, "for ax in axes.flat:");
    let _ = writeln!(s, "    ax.set_visible(False)");
    let _ = writeln!(s, "for row, col, title, name in PANELS:");
    let _ = writeln!(s, "    d = load(name)");
    let _ = writeln!(s, "    ax = axes[row][col]");
    let _ = writeln!(s, "    ax.set_visible(True)");
    let _ = writeln!(s, "    ax.plot(d[\"t\"], d[\"e1\"], label=\"e1\")");
    let _ = writeln!(s, "    ax.plot(d[\"t\"], d[\"e2\"], label=\"e2\")");
    let _ = writeln!(s, "    if DEADLINE is not None:");
    let _ = writeln!(s, "        ax.axvline(DEADLINE, color=\"k\", linestyle=\"--\", linewidth=0.8)");
    let _ = writeln!(s, "    ax.set_yscale(\"symlog\", linthresh=1e-2)");
    let _ = writeln!(s, "    ax.set_title(title, fontsize=9)");
    let _ = writeln!(s, "    ax.grid(True, linewidth=0.3)");
    let _ = writeln!(s, "    if row == ROWS - 1:");
    let _ = writeln!(s, "        ax.set_xlabel(\"t [s]\")");
    let _ = writeln!(s, "    if col == 0:");
    let _ = writeln!(s, "        ax.legend(loc=\"upper right\", fontsize=8)");
    let _ = writeln!(s, "fig.tight_layout()");
    let _ = writeln!(s, "fig.savefig(HERE / {}, dpi=150)", py_str(&layout.output));
    Ok(s)
}
