//! Experiment harness for the biped walking stack.
//!
//! Builds on `biped-core`: resolves scenario presets into full
//! configurations, runs the closed control loop against the contact plant,
//! streams telemetry to versioned CSV, recomputes run metrics from that CSV,
//! compares runs, and renders the standard figures.

pub mod metrics;
pub mod plots;
pub mod runner;
pub mod scenario;
pub mod telemetry;

pub use metrics::{compare_runs, compute_metrics, render_comparison, RunComparison, RunMetrics};
pub use plots::emit_plots;
pub use runner::{run_to_file, run_to_writer, RunError, RunResult};
pub use scenario::{apply_scenario, load_scenario_config};
pub use telemetry::{parse_csv, CsvDoc};
