//! Experiment plumbing: configuration, training runs, sweeps, metrics,
//! plots and evaluation.

pub mod config;
pub mod eval;
pub mod metrics;
pub mod plot;
pub mod sweep;
pub mod train;

pub use config::{EarlyStop, Profile, RunConfig, TrainConfig, SCHEMA_VERSION};
pub use eval::{evaluate, evaluate_run_dir, EvalReport};
pub use metrics::{
    completed_episodes, read_metrics, recent_success_rate, write_metrics, MetricsRow,
};
pub use plot::{aggregate, ema, plot_runs, render_svg, Curve, RunCurve, EMA_WEIGHT};
pub use sweep::{
    collision_table, percent_difference, sweep, RunOutcome, SweepReport, SweepSpec, TableRow,
};
pub use train::{train, RunSummary, TrainOutcome};
