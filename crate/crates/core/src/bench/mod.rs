//! Benchmark runner: expands a [`BenchSpec`] into trials, runs them on a
//! worker pool and writes CSV reports.

mod report;
mod run;
mod spec;
mod stats;

pub use report::{sanitize_id, write_reports, write_summary_csv, write_trials_csv, ReportFiles};
pub use run::{run_batch, trial_seed, CutTransform, TrialReport};
pub use spec::{BenchSpec, InstanceSpec, OptimizerKind, SolverSpec, Source, WishartSweep, SPEC_VERSION};
pub use stats::{
    aggregate_traces, best_so_far, summarize, InstanceSummary, InstanceTrace, Metric, Stats, TraceRow,
    OPTIMUM_TOLERANCE,
};
