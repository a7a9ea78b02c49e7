//! Experiments: task generation, the query-synthesize-score loop, metrics
//! and artifacts.

mod artifacts;
mod config;
mod experiment;
mod metrics;
mod task;

use thiserror::Error;

use crate::fspace::FspaceError;

pub use artifacts::{
    comparison_table, read_csv, read_jsonl, write_csv, write_jsonl, write_report, HISTORIES_FILE, RUNS_CSV,
    RUNS_FILE, SUMMARY_FILE, TASKS_FILE, TRAINING_FILE, VIOLATIONS_FILE,
};
pub use config::{
    Dsl, ExperimentConfig, FspaceConfig, KarelConfig, ListConfig, PoolConfig, RegimeSpec, StrategyParams,
    StrategySpec, SynthConfig, SynthMethod,
};
pub use experiment::{
    check_runs, run_experiment, summarize, ExperimentReport, HistoryRecord, RunRecord, Stage, StrategySummary,
};
pub use metrics::{coverage_report, coverage_row, evaluate_metrics, CoverageRow, MetricRow};
pub use task::{
    make_task, task_rng, valid_inputs, Task, TaskRecord, TaskSource, QUERY_STREAM, TASK_STREAM,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("could not draw a ground truth with enough valid inputs for task {0}")]
    TaskGeneration(usize),
    #[error(transparent)]
    Fspace(#[from] FspaceError),
    #[error("io: {0}")]
    Io(String),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
}
