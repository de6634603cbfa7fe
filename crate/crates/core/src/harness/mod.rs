//! Experiment plumbing: config files, metrics CSV, checkpoints, SVG curves
//! and the train / eval / compare runners.

mod checkpoint;
mod config;
mod metrics;
mod plot;
mod run;

pub use crate::grpo::{IterationMetrics, PolicyMetrics};
pub use checkpoint::Checkpoint;
pub use config::{load_config, RunConfig, CONFIG_KEYS};
pub use metrics::{csv_header, csv_rows, MetricsTable, CSV_COLUMNS};
pub use plot::{emit_plot, render_svg, PlotFrame, SVG_HEIGHT, SVG_WIDTH};
pub use run::{
    load_metrics, periodic_checkpoint_name, run_compare, run_eval, run_resume, run_train, summarize, CellSummary,
    CompareCell, CompareReport, EvalSummary, TrainOutcome, FINAL_CHECKPOINT, FINAL_WINDOW, METRICS_FILE, PLOT_FILE,
    REPORT_FILE, TREND_WINDOW,
};
