//! Scenario files, the check pipeline, reports and CSV output.

mod golden;
mod output;
mod run;
mod scenario;
mod sweep;

pub use golden::{golden_suite, GoldenCheck};
pub use output::{emit_plot_data, write_outputs};
pub use run::{
    run_scenario, AbelianSummary, BromwichSummary, CheckResults, Command, IntegrationRuleSummary, Note,
    OperatorSummary, OracleSummary, PlotData, RunOptions, RunReport, TrajectorySummary, REPORT_SCHEMA, TOOL_NAME,
};
pub use scenario::{Check, Scenario, VectorSpec};
pub use sweep::{generate_sweep, run_sweep, scenarios_in, SweepEntry};
