//! Declarative pipelines: spec parsing, the stage DAG, fingerprint-based
//! caching, execution, the lock file and the provenance of a run.

mod dag;
mod fingerprint;
mod lock;
mod record;
mod run;
mod spec;

use thiserror::Error;

use crate::provgraph::GraphError;

pub use dag::{build_dag, Dag};
pub use fingerprint::{
    checkout_path, fingerprint_stage, hash_path, parse_manifest, store_path, Fingerprint,
    MANIFEST_MEDIA_TYPE,
};
pub use lock::{LockFile, LockRecord, StageStatus, LOCK_FILE, LOCK_FORMAT_VERSION};
pub use record::{record_execution, record_execution_with_iris, ExecutionIris};
pub use run::{
    load_params, run_pipeline, status, RunOptions, RunOutcome, RunStatus, StageReport, StageState,
    StaleReason,
};
pub use spec::{
    normalize_path, parse_pipeline, ParamsFile, PipelineSpec, SoftwareRef, StageSpec, TrainingSpec,
    DEFAULT_PARAMS_FILE, PIPELINE_FILE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("pipeline file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("params file line {line}: {message}")]
    ParamsSyntax { line: usize, message: String },
    #[error("stage '{0}' is defined twice")]
    DuplicateStage(String),
    #[error("out '{path}' is produced by both '{first}' and '{second}'")]
    DuplicateOut {
        path: String,
        first: String,
        second: String,
    },
    #[error("path '{0}' must be relative, normalized and stay inside the workspace")]
    BadPath(String),
    #[error("stage '{stage}' lists '{path}' as both dep and out")]
    DepIsOut { stage: String, path: String },
    #[error("invalid stage name '{0}' (allowed: A-Z a-z 0-9 _ -)")]
    InvalidStageName(String),
    #[error("stage '{0}' has an empty cmd")]
    EmptyCommand(String),
    #[error("training section: {0}")]
    Training(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("stage '{stage}': dep '{path}' does not exist")]
    MissingDep { stage: String, path: String },
    #[error("param '{0}' is not defined in the params file")]
    MissingParam(String),
    #[error("no stage named '{0}'")]
    UnknownStage(String),
    #[error("stage '{stage}' failed with exit code {exit_code}")]
    ExecutionFailed { stage: String, exit_code: i32 },
    #[error("stage '{stage}' succeeded but did not produce '{path}'")]
    MissingOut { stage: String, path: String },
    #[error("lock file has no successful record for stage '{0}'")]
    IncompleteLock(String),
    #[error("lock file: {0}")]
    LockSyntax(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("object store: {0}")]
    Store(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl PipelineError {
    /// Failures caused by running a stage, as opposed to a bad spec,
    /// params file or workspace.
    pub fn is_execution_failure(&self) -> bool {
        matches!(
            self,
            PipelineError::ExecutionFailed { .. } | PipelineError::MissingOut { .. }
        )
    }
}
