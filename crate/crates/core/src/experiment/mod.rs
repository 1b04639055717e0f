//! Cross-validated experiment runner: configuration, fold splitting, the
//! method × k sweep and report files.

mod config;
mod crossval;
mod report;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use self::config::{parse_config, parse_config_str, DatasetSource, ExperimentConfig, Method};
pub use self::crossval::{crossval_sessions, crossval_split, Fold};
pub use self::report::{aggregate, emit_report, AggregateRow, RunReport, RunRow, TOOL_VERSION};
pub use self::run::{load_dataset, prepare_fold, run_experiment, FoldData};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    TypeError { key: String, line: usize, expected: &'static str, value: String },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{sessions} sessions cannot fill {folds} folds")]
    TooFewSessions { sessions: usize, folds: usize },
    #[error("report has no rows")]
    EmptyReport,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("fold {fold}, method {method}{}: {source}", k.map(|k| format!(", k = {k}")).unwrap_or_default())]
    Job {
        fold: usize,
        method: Method,
        k: Option<usize>,
        #[source]
        source: Box<crate::Error>,
    },
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::TooFewSessions { .. } => 3,
            ExperimentError::Job { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
