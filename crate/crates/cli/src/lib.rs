//! Scenario runner for the multigroup scheme: single runs, detection-rate
//! statistics and timing tables, all with a versioned JSON report.

pub mod commands;
pub mod report;

pub use commands::{bench, load_scenario, replay_file, run, stats, Overrides};
pub use report::{BenchReport, BenchRow, Report, ReportBody, RunReport, StatsReport, Timing, REPORT_VERSION};
