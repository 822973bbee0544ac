//! Runs solver-by-problem experiment matrices and writes summary tables and
//! per-iteration histories as CSV or JSON.

mod error;
mod experiment;
mod report;

pub use error::{HarnessError, Result};
pub use experiment::{
    run_experiment, run_registry, with_linesearch, ConfigOverrides, ExperimentSpec, MethodResult, ProblemSelector,
    RunReport, Skipped,
};
pub use report::{
    compare_table, emit_report, emit_reports, fmt_float, history_file_name, summary_rows, Format, SummaryRow,
    HISTORY_HEADER, SUMMARY_HEADER,
};
