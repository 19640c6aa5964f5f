use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use super::dag::{build_dag, Dag};
use super::fingerprint::{
    fingerprint_stage, fingerprint_value, hash_path, stage_params, store_path, Fingerprint,
};
use super::lock::{LockFile, LockRecord, StageStatus, LOCK_FILE};
use super::spec::{ParamsFile, PipelineSpec, StageSpec};
use super::PipelineError;
use crate::cas::{ObjectRef, Store};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Re-execute selected stages even when cached.
    pub force: bool,
    /// Run only this stage and the stages it depends on.
    pub only_stage: Option<String>,
    /// Maximum number of stages executing at once; 0 and 1 both mean sequential.
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Fresh,
    Cached,
    Failed,
    Skipped,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Fresh => "fresh",
            RunStatus::Cached => "cached",
            RunStatus::Failed => "failed",
            RunStatus::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub name: String,
    pub status: RunStatus,
    pub duration: Duration,
    pub exit_code: Option<i32>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub lock: LockFile,
    /// Selected stages in topological order.
    pub stages: Vec<StageReport>,
    /// First failure; later stages were not started.
    pub failure: Option<PipelineError>,
}

impl RunOutcome {
    pub fn executed(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| matches!(s.status, RunStatus::Fresh | RunStatus::Failed))
            .count()
    }
}

pub fn load_params(spec: &PipelineSpec, workspace: &Path) -> Result<ParamsFile, PipelineError> {
    let path = workspace.join(&spec.params_file);
    match fs::read_to_string(&path) {
        Ok(text) => ParamsFile::parse(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ParamsFile::default()),
        Err(e) => Err(PipelineError::Io {
            path: spec.params_file.clone(),
            message: e.to_string(),
        }),
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Current out hashes equal the recorded ones.
fn outs_intact(
    stage: &StageSpec,
    record: &LockRecord,
    workspace: &Path,
) -> Result<bool, PipelineError> {
    if record.outs.len() != stage.outs.len() {
        return Ok(false);
    }
    for o in &stage.outs {
        let Some(recorded) = record.outs.get(o) else {
            return Ok(false);
        };
        match hash_path(workspace, o)? {
            Some(now) if now.sha256 == recorded.sha256 => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

struct Done {
    name: String,
    status: RunStatus,
    record: Option<LockRecord>,
    duration: Duration,
    error: Option<PipelineError>,
}

struct Job<'a> {
    stage: &'a StageSpec,
    previous: Option<&'a LockRecord>,
    params: &'a ParamsFile,
    workspace: &'a Path,
    store: &'a Store,
    force: bool,
}

impl Job<'_> {
    fn run(&self) -> Done {
        let clock = Instant::now();
        let name = self.stage.name.clone();
        let fp = match fingerprint_stage(self.stage, self.params, self.workspace) {
            Ok(fp) => fp,
            Err(e) => {
                return Done {
                    name,
                    status: RunStatus::Failed,
                    record: None,
                    duration: clock.elapsed(),
                    error: Some(e),
                }
            }
        };
        if !self.force {
            if let Some(prev) = self
                .previous
                .filter(|p| p.succeeded() && p.fingerprint == fp.value)
            {
                match outs_intact(self.stage, prev, self.workspace) {
                    Ok(true) => {
                        let mut record = prev.clone();
                        record.status = StageStatus::Cached;
                        return Done {
                            name,
                            status: RunStatus::Cached,
                            record: Some(record),
                            duration: clock.elapsed(),
                            error: None,
                        };
                    }
                    Ok(false) => {}
                    Err(e) => {
                        return Done {
                            name,
                            status: RunStatus::Failed,
                            record: None,
                            duration: clock.elapsed(),
                            error: Some(e),
                        }
                    }
                }
            }
        }
        let (record, error) = match self.execute(fp) {
            Ok(pair) => pair,
            Err(e) => (None, Some(e)),
        };
        Done {
            name,
            status: if error.is_some() {
                RunStatus::Failed
            } else {
                RunStatus::Fresh
            },
            record,
            duration: clock.elapsed(),
            error,
        }
    }

    fn execute(
        &self,
        fp: Fingerprint,
    ) -> Result<(Option<LockRecord>, Option<PipelineError>), PipelineError> {
        let stage = self.stage;
        for o in &stage.outs {
            let p = self.workspace.join(o);
            match fs::symlink_metadata(&p) {
                Ok(m) if m.is_dir() => fs::remove_dir_all(&p).map_err(io_err(&p))?,
                Ok(_) => fs::remove_file(&p).map_err(io_err(&p))?,
                Err(_) => {}
            }
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
        }
        let logs = self.store.root().join("tmp");
        fs::create_dir_all(&logs).map_err(io_err(&logs))?;
        let out_log = tempfile::NamedTempFile::new_in(&logs).map_err(io_err(&logs))?;
        let err_log = tempfile::NamedTempFile::new_in(&logs).map_err(io_err(&logs))?;

        let started_at = now();
        let status = Command::new("sh")
            .arg("-c")
            .arg(&stage.command)
            .current_dir(self.workspace)
            .env("AIMP_STAGE", &stage.name)
            .stdin(Stdio::null())
            .stdout(out_log.reopen().map_err(io_err(out_log.path()))?)
            .stderr(err_log.reopen().map_err(io_err(err_log.path()))?)
            .status()
            .map_err(|e| PipelineError::Io {
                path: "sh".into(),
                message: e.to_string(),
            })?;
        let ended_at = now();
        let store_err = |e: crate::cas::CasError| PipelineError::Store(e.to_string());
        let stdout = self.store.put_file(out_log.path()).map_err(store_err)?;
        let stderr = self.store.put_file(err_log.path()).map_err(store_err)?;
        let exit_code = status.code().unwrap_or(-1);

        let mut record = LockRecord {
            fingerprint: fp.value,
            command: stage.command.clone(),
            deps: fp.deps,
            outs: BTreeMap::new(),
            params: fp.params,
            tool: stage.tool.clone(),
            exit_code,
            started_at,
            ended_at,
            stdout: Some(stdout),
            stderr: Some(stderr),
            status: StageStatus::Failed,
        };
        if exit_code != 0 {
            let e = PipelineError::ExecutionFailed {
                stage: stage.name.clone(),
                exit_code,
            };
            return Ok((Some(record), Some(e)));
        }
        for o in &stage.outs {
            match store_path(self.store, self.workspace, o)? {
                Some(r) => {
                    record.outs.insert(o.clone(), r);
                }
                None => {
                    let e = PipelineError::MissingOut {
                        stage: stage.name.clone(),
                        path: o.clone(),
                    };
                    return Ok((Some(record), Some(e)));
                }
            }
        }
        record.status = StageStatus::Fresh;
        Ok((Some(record), None))
    }
}

/// Execute the pipeline in `workspace` and write `aimp.lock` once at the
/// end. Configuration problems are returned as `Err`; a failing stage is
/// reported in [`RunOutcome::failure`] and the lock still records every
/// stage that finished.
pub fn run_pipeline(
    spec: &PipelineSpec,
    workspace: &Path,
    store: &Store,
    opts: &RunOptions,
) -> Result<RunOutcome, PipelineError> {
    let dag = build_dag(spec)?;
    let params = load_params(spec, workspace)?;
    let lock_path = workspace.join(LOCK_FILE);
    let previous = LockFile::load(&lock_path)?;
    let selected: BTreeSet<String> = match &opts.only_stage {
        Some(s) if spec.stage(s).is_none() => return Err(PipelineError::UnknownStage(s.clone())),
        Some(s) => dag.ancestors_inclusive(s),
        None => dag.nodes().iter().cloned().collect(),
    };
    let jobs = opts.jobs.max(1);

    let mut lock = LockFile::new(spec.workspace_id.clone());
    lock.params_file = hash_path(workspace, &spec.params_file)?;
    if let Some(prev) = &previous {
        for s in dag.nodes() {
            if let Some(r) = prev.stages.get(s) {
                lock.stages.insert(s.clone(), r.clone());
            }
        }
    }

    let done = schedule(spec, &dag, &selected, jobs, |stage| Job {
        stage,
        previous: previous.as_ref().and_then(|p| p.stages.get(&stage.name)),
        params: &params,
        workspace,
        store,
        force: opts.force,
    });

    let mut failure = None;
    let mut by_name: BTreeMap<String, Done> =
        done.into_iter().map(|d| (d.name.clone(), d)).collect();
    let mut reports = Vec::new();
    for name in dag.order().iter().filter(|n| selected.contains(*n)) {
        match by_name.remove(name) {
            Some(d) => {
                let exit_code = d.record.as_ref().map(|r| r.exit_code);
                if let Some(r) = d.record {
                    lock.stages.insert(name.clone(), r);
                }
                if failure.is_none() {
                    failure = d.error;
                }
                reports.push(StageReport {
                    name: name.clone(),
                    status: d.status,
                    duration: d.duration,
                    exit_code,
                });
            }
            None => reports.push(StageReport {
                name: name.clone(),
                status: RunStatus::Skipped,
                duration: Duration::ZERO,
                exit_code: None,
            }),
        }
    }
    lock.save(&lock_path)?;
    Ok(RunOutcome {
        lock,
        stages: reports,
        failure,
    })
}

/// Run jobs respecting DAG edges, at most `jobs` at a time. After the first
/// failure no further stage is started.
fn schedule<'a>(
    spec: &'a PipelineSpec,
    dag: &Dag,
    selected: &BTreeSet<String>,
    jobs: usize,
    make: impl Fn(&'a StageSpec) -> Job<'a>,
) -> Vec<Done> {
    let mut finished: BTreeMap<String, RunStatus> = BTreeMap::new();
    let mut started: BTreeSet<String> = BTreeSet::new();
    let mut results = Vec::new();
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Done>();
        let mut running = 0usize;
        let mut stopped = false;
        loop {
            if !stopped {
                for name in dag.order() {
                    if running >= jobs {
                        break;
                    }
                    if !selected.contains(name) || started.contains(name) {
                        continue;
                    }
                    let ready = dag.predecessors(name).iter().all(|p| {
                        !selected.contains(*p)
                            || matches!(
                                finished.get(*p),
                                Some(RunStatus::Fresh | RunStatus::Cached)
                            )
                    });
                    if !ready {
                        continue;
                    }
                    started.insert(name.clone());
                    running += 1;
                    let job = make(spec.stage(name).expect("dag node is a stage"));
                    let tx = tx.clone();
                    scope.spawn(move || {
                        let _ = tx.send(job.run());
                    });
                }
            }
            if running == 0 {
                break;
            }
            let d = rx.recv().expect("a running job always reports");
            running -= 1;
            if d.status == RunStatus::Failed {
                stopped = true;
            }
            finished.insert(d.name.clone(), d.status);
            results.push(d);
        }
    });
    results
}

/// Why a stage would or would not run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaleReason {
    UpToDate,
    NeverRun,
    CommandChanged,
    DepChanged,
    ParamChanged,
    OutMissing,
    /// An out exists but no longer hashes to its recorded value.
    OutChanged,
}

impl std::fmt::Display for StaleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StaleReason::UpToDate => "up-to-date",
            StaleReason::NeverRun => "never-run",
            StaleReason::CommandChanged => "command-changed",
            StaleReason::DepChanged => "dep-changed",
            StaleReason::ParamChanged => "param-changed",
            StaleReason::OutMissing => "out-missing",
            StaleReason::OutChanged => "out-changed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageState {
    pub stage: String,
    pub reason: StaleReason,
    /// Path or key that triggered the reason, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Per-stage staleness, in topological order. Pure: reads the workspace,
/// writes nothing.
pub fn status(
    spec: &PipelineSpec,
    lock: Option<&LockFile>,
    workspace: &Path,
) -> Result<Vec<StageState>, PipelineError> {
    let dag = build_dag(spec)?;
    let params = load_params(spec, workspace)?;
    let mut out = Vec::new();
    for name in dag.order() {
        let stage = spec.stage(name).expect("dag node is a stage");
        let (reason, detail) = stage_state(
            stage,
            lock.and_then(|l| l.stages.get(name)),
            &params,
            workspace,
        )?;
        out.push(StageState {
            stage: name.clone(),
            reason,
            detail,
        });
    }
    Ok(out)
}

fn stage_state(
    stage: &StageSpec,
    record: Option<&LockRecord>,
    params: &ParamsFile,
    workspace: &Path,
) -> Result<(StaleReason, Option<String>), PipelineError> {
    use StaleReason::*;
    let Some(record) = record.filter(|r| r.succeeded()) else {
        return Ok((NeverRun, None));
    };
    let mut recorded_outs: Vec<&String> = record.outs.keys().collect();
    recorded_outs.sort();
    let mut declared_outs: Vec<&String> = stage.outs.iter().collect();
    declared_outs.sort();
    if record.command != stage.command
        || record.tool != stage.tool
        || recorded_outs != declared_outs
    {
        return Ok((CommandChanged, None));
    }
    let mut deps: BTreeMap<String, ObjectRef> = BTreeMap::new();
    for d in &stage.deps {
        match hash_path(workspace, d)? {
            Some(r) if record.deps.get(d).is_some_and(|old| old.sha256 == r.sha256) => {
                deps.insert(d.clone(), r);
            }
            _ => return Ok((DepChanged, Some(d.clone()))),
        }
    }
    if let Some(extra) = record.deps.keys().find(|k| !stage.deps.contains(k)) {
        return Ok((DepChanged, Some(extra.clone())));
    }
    let current = match stage_params(stage, params) {
        Ok(p) => p,
        Err(PipelineError::MissingParam(k)) => return Ok((ParamChanged, Some(k))),
        Err(e) => return Err(e),
    };
    if current != record.params {
        let key = current
            .keys()
            .chain(record.params.keys())
            .find(|k| current.get(*k) != record.params.get(*k))
            .cloned();
        return Ok((ParamChanged, key));
    }
    if fingerprint_value(stage, &deps, &current) != record.fingerprint {
        return Ok((CommandChanged, None));
    }
    for o in &stage.outs {
        match hash_path(workspace, o)? {
            None => return Ok((OutMissing, Some(o.clone()))),
            Some(r) if r.sha256 != record.outs[o].sha256 => {
                return Ok((OutChanged, Some(o.clone())))
            }
            Some(_) => {}
        }
    }
    Ok((UpToDate, None))
}
