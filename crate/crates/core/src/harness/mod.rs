//! Experiment orchestration: configs, seeded training runs, aggregation,
//! charts, the complexity sweep, and checkpoint files.

mod aggregate;
mod analyze;
mod chart;
mod config;
mod run;

use std::fs;
use std::path::Path;

pub use aggregate::{aggregate_metrics, aggregate_runs, AggregateTable, MeanStd, Metric};
pub use analyze::{analysis_csv, analyze, AnalysisRow, ANALYSIS_HEADER};
pub use chart::{chart_bounds, emit_chart, render_svg, ChartBounds, ChartFiles};
pub use config::{parse_betas, parse_objective, parse_seeds, ExperimentConfig, ExperimentPlan};
pub use run::{
    metrics_to_csv, parse_metrics_csv, read_metrics_csv, read_trajectory_rewards, run_experiment,
    run_seeds, MetricsRow, RunRecord, METRICS_HEADER,
};

use crate::error::Result;
use crate::policy::PolicyParams;

pub fn save_checkpoint(params: &PolicyParams, path: &Path) -> Result<()> {
    fs::write(path, params.to_checkpoint_string())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyParams> {
    PolicyParams::from_checkpoint_str(&fs::read_to_string(path)?)
}
