//! Config-driven experiments: parsing, the cell runner, summaries and plot
//! scripts.

mod config;
mod plot;
mod run;

pub use config::{ic_label, ExperimentConfig};
pub use plot::{emit_plot, PlotLayout, PlotPanel};
pub use run::{
    cell_file_name, certify_config, plot_script, resolve_out_dir, run_cell, run_cells, run_experiment,
    summary_kv, summary_text, write_artifacts, Cell, CellStatus, CellSummary, ExperimentOutcome, BOUNDS_KV,
    BOUNDS_TXT, CONFIG_COPY, PLOT_IMAGE, PLOT_SCRIPT, SUMMARY_KV, SUMMARY_TXT,
};
