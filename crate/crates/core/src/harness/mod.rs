//! Experiment orchestration: repeated seeded runs, per-sample records, run statistics,
//! paired comparisons and report emission.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod records;
pub mod report;
pub mod scoring;
pub mod stats;

pub use compare::{compare_records, Comparison, MetricComparison};
pub use config::{DatasetPaths, ExperimentConfig, Method};
pub use experiment::{
    instruction_score, prepare_instruction, run_experiment, Backends, ExperimentInputs, ExperimentOutcome,
    RunOptions,
};
pub use records::{
    aggregate, aggregate_records, MetricAggregate, MetricReport, MetricSummary, RawOutputRecord,
    RunDirectory, RunWriter, SampleMetricRecord,
};
pub use report::{emit_report, MethodResult, ReportFormat, ReportInput, TokenUsage};
pub use scoring::{extract_answer, headline_metric, metric_columns, score_sample};
pub use stats::{paired_t_test, summarize, StatSummary, StdKind, TTestResult};
