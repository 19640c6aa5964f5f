use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};

use aimp_core::cas::{remote, ObjectRef, Store};
use aimp_core::dcat::{harvest as fdp_harvest, HarvestOptions, HarvestedDescriptor};
use aimp_core::passport::{
    self, lineage_graph, scaffold_manual_template, training_record, ManualMetadata, ModelPassport,
    Outcome, PassportFormat,
};
use aimp_core::pipeline::{
    self, checkout_path, hash_path, parse_manifest, parse_pipeline, run_pipeline, LockFile,
    PipelineSpec, RunOptions, RunStatus, StaleReason, LOCK_FILE, MANIFEST_MEDIA_TYPE,
    PIPELINE_FILE,
};
use aimp_core::report::{render, RenderFormat, RenderOptions};

use crate::exit::{Failure, OK, VERIFY};
use crate::ui::Ui;

pub const STORE_DIR: &str = ".aimp";
pub const DATASETS_FILE: &str = "aimp-datasets.json";

const PIPELINE_TEMPLATE: &str = "\
# Pipeline definition. Every stage runs `cmd` from the workspace root.
# A stage is re-executed when its command, a dep, a referenced param or
# one of its outs changes.
params: params.yaml
stages: {}
# stages:
#   Preprocess:
#     cmd: python preprocess.py
#     deps: [preprocess.py, data/raw]
#     outs: [data/clean]
#     params: [image_size]
#   Train:
#     cmd: python train.py
#     deps: [train.py, data/clean]
#     outs: [model.pt, metrics.json]
#     params: [train]
# training:
#   stage: Train
#   model: model.pt
#   metrics: metrics.json
";

const PARAMS_TEMPLATE: &str = "\
# Parameters referenced by stages as `params: [key]` or `params: [section.key]`.
{}
";

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::internal(format!("{}: {e}", path.display()))
}

fn workspace() -> Result<PathBuf, Failure> {
    std::env::current_dir()
        .map_err(|e| Failure::internal(format!("cannot read the working directory: {e}")))
}

fn load_spec(ws: &Path) -> Result<PipelineSpec, Failure> {
    let path = ws.join(PIPELINE_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Failure::config(format!(
                "{PIPELINE_FILE} not found in {}; run `aimp init` first",
                ws.display()
            )))
        }
        Err(e) => return Err(io_fail(&path, e)),
    };
    Ok(parse_pipeline(&text)?)
}

fn load_lock(ws: &Path) -> Result<Option<LockFile>, Failure> {
    Ok(LockFile::load(&ws.join(LOCK_FILE))?)
}

fn store(ws: &Path) -> Store {
    Store::new(ws.join(STORE_DIR))
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_fail(parent, e))?;
    }
    fs::write(path, data).map_err(|e| io_fail(path, e))
}

pub fn init(ui: &Ui) -> Result<u8, Failure> {
    let ws = workspace()?;
    let mut created = Vec::new();
    let objects = ws.join(STORE_DIR).join("objects");
    if !objects.is_dir() {
        fs::create_dir_all(&objects).map_err(|e| io_fail(&objects, e))?;
        created.push(format!("{STORE_DIR}/"));
    }
    for (name, body) in [
        (PIPELINE_FILE, PIPELINE_TEMPLATE.to_string()),
        (pipeline::DEFAULT_PARAMS_FILE, PARAMS_TEMPLATE.to_string()),
        (passport::MANUAL_FILE, scaffold_manual_template()),
    ] {
        let path = ws.join(name);
        if path.exists() {
            continue;
        }
        fs::write(&path, body).map_err(|e| io_fail(&path, e))?;
        created.push(name.to_string());
    }
    if created.is_empty() {
        ui.say(format!("workspace {} already initialized", ws.display()));
    }
    for c in &created {
        ui.say(format!("created {c}"));
    }
    ui.document(&json!({ "created": created }));
    Ok(OK)
}

pub fn run(ui: &Ui, force: bool, stage: Option<String>, jobs: usize) -> Result<u8, Failure> {
    let ws = workspace()?;
    let spec = load_spec(&ws)?;
    let opts = RunOptions {
        force,
        only_stage: stage,
        jobs,
    };
    let outcome = run_pipeline(&spec, &ws, &store(&ws), &opts)?;
    let width = outcome
        .stages
        .iter()
        .map(|s| s.name.len())
        .max()
        .unwrap_or(0);
    let mut rows = Vec::new();
    for s in &outcome.stages {
        let secs = s.duration.as_secs_f64();
        match s.status {
            RunStatus::Skipped => ui.say(format!("{:<width$}  {}", s.name, s.status)),
            _ => ui.say(format!(
                "{:<width$}  {:<7}  {secs:.3}s",
                s.name,
                s.status.to_string()
            )),
        }
        rows.push(json!({
            "stage": s.name,
            "status": s.status,
            "durationMs": s.duration.as_millis() as u64,
            "exitCode": s.exit_code,
        }));
    }
    let code = match &outcome.failure {
        Some(e) => {
            ui.error(e.to_string());
            crate::exit::pipeline_code(e)
        }
        None => OK,
    };
    ui.document(&json!({
        "stages": rows,
        "executed": outcome.executed(),
        "failure": outcome.failure.as_ref().map(|e| e.to_string()),
    }));
    Ok(code)
}

pub fn status(ui: &Ui) -> Result<u8, Failure> {
    let ws = workspace()?;
    let spec = load_spec(&ws)?;
    let lock = load_lock(&ws)?;
    let states = pipeline::status(&spec, lock.as_ref(), &ws)?;
    let width = states.iter().map(|s| s.stage.len()).max().unwrap_or(0);
    for s in &states {
        match &s.detail {
            Some(d) => ui.say(format!("{:<width$}  {} ({d})", s.stage, s.reason)),
            None => ui.say(format!("{:<width$}  {}", s.stage, s.reason)),
        }
    }
    let stale = states
        .iter()
        .filter(|s| s.reason != StaleReason::UpToDate)
        .count();
    ui.say(format!("{stale} of {} stages stale", states.len()));
    ui.document(&json!({ "stages": states, "stale": stale }));
    Ok(OK)
}

pub fn harvest(ui: &Ui, url: &str, out: &Path, retries: u32, timeout: u64) -> Result<u8, Failure> {
    let opts = HarvestOptions {
        timeout: Duration::from_secs(timeout.max(1)),
        retries,
        ..HarvestOptions::default()
    };
    let result = fdp_harvest(url, &opts)?;
    for w in &result.warnings {
        ui.warn(w);
    }
    for h in &result.descriptors {
        let d = &h.descriptor;
        let issues = aimp_core::dcat::validate_descriptor(d);
        for i in &issues {
            ui.warn(format!("{}: {i}", d.id));
        }
        ui.say(format!("{}  {}", d.id, d.title));
    }
    let doc =
        serde_json::to_value(&result.descriptors).map_err(|e| Failure::internal(e.to_string()))?;
    write_file(out, &aimp_core::canonical::to_vec(&doc))?;
    ui.say(format!(
        "wrote {} descriptor(s) to {}",
        result.descriptors.len(),
        out.display()
    ));
    ui.document(&json!({
        "out": out.display().to_string(),
        "descriptors": result.descriptors.iter().map(|h| h.descriptor.id.clone()).collect::<Vec<_>>(),
        "warnings": result.warnings,
    }));
    Ok(OK)
}

fn load_datasets(path: &Path) -> Result<Vec<HarvestedDescriptor>, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn passport_stem(model: &str) -> String {
    let name = model.rsplit('/').next().unwrap_or(model);
    match name.split_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => name.to_string(),
    }
}

pub fn passport_build(
    ui: &Ui,
    manual: &Path,
    datasets: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let ws = workspace()?;
    let spec = load_spec(&ws)?;
    let lock =
        load_lock(&ws)?.ok_or_else(|| Failure::config("no lock file yet; run `aimp run` first"))?;
    let stale: Vec<String> = pipeline::status(&spec, Some(&lock), &ws)?
        .into_iter()
        .filter(|s| s.reason != StaleReason::UpToDate)
        .map(|s| format!("{} ({})", s.stage, s.reason))
        .collect();
    if !stale.is_empty() {
        return Err(Failure::config(format!(
            "workspace differs from the lock file: {}; run `aimp run` first",
            stale.join(", ")
        )));
    }
    let manual_text = fs::read_to_string(manual).map_err(|e| {
        Failure::config(format!(
            "{}: {e}; `aimp init` writes a template",
            manual.display()
        ))
    })?;
    let manual = ManualMetadata::parse(&manual_text)?;
    let missing = passport::validate_manual(&manual);
    if !missing.is_empty() {
        return Err(passport::PassportError::ManualIncomplete(missing).into());
    }
    let datasets = match datasets {
        Some(p) => load_datasets(p)?,
        None if ws.join(DATASETS_FILE).is_file() => load_datasets(&ws.join(DATASETS_FILE))?,
        None => Vec::new(),
    };
    let training = training_record(&spec, &lock, &store(&ws), &ws)?;
    let graph = lineage_graph(&spec, &lock, &datasets, &training, &manual)?;
    let stem = passport_stem(&training.model_path);
    let p = passport::assemble(datasets, graph, lock, training, manual)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_default();
    let json_path = dir.join(format!("{stem}.passport.json"));
    let ttl_path = dir.join(format!("{stem}.passport.ttl"));
    write_file(&json_path, &p.serialize(PassportFormat::CanonicalJson)?)?;
    write_file(&ttl_path, &p.serialize(PassportFormat::Turtle)?)?;
    ui.say(format!("identity {}", p.identity));
    ui.say(format!("wrote {}", json_path.display()));
    ui.say(format!("wrote {}", ttl_path.display()));
    ui.document(&json!({
        "identity": p.identity,
        "json": json_path.display().to_string(),
        "turtle": ttl_path.display().to_string(),
    }));
    Ok(OK)
}

fn load_passport(file: &Path) -> Result<ModelPassport, Failure> {
    ModelPassport::load_file(file).map_err(|e| Failure::config(e.to_string()))
}

pub fn passport_verify(
    ui: &Ui,
    file: &Path,
    model: Option<&Path>,
    ws: Option<&Path>,
) -> Result<u8, Failure> {
    let p = load_passport(file)?;
    let report = passport::verify(&p, ws, model);
    for c in &report.checks {
        ui.say(c.to_string());
    }
    let passed = report.passed();
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.outcome == Outcome::Fail)
        .map(|c| c.name)
        .collect();
    if passed {
        ui.say(format!("verified {}", report.identity));
    } else {
        ui.say(format!("verification failed: {}", failed.join(", ")));
    }
    let mut doc = serde_json::to_value(&report).map_err(|e| Failure::internal(e.to_string()))?;
    doc["passed"] = Value::Bool(passed);
    ui.document(&doc);
    Ok(if passed { OK } else { VERIFY })
}

pub fn report(
    ui: &Ui,
    file: &Path,
    format: RenderFormat,
    out: Option<&Path>,
    graph: bool,
) -> Result<u8, Failure> {
    let p = load_passport(file)?;
    let opts = RenderOptions {
        format,
        include_graph_svg: graph && format == RenderFormat::Html,
    };
    let text = render(&p, &opts)?;
    let ext = match format {
        RenderFormat::Html => "html",
        RenderFormat::Markdown => "md",
    };
    let target = match out {
        Some(o) => o.to_path_buf(),
        None => {
            let name = file
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_default();
            let base = name.strip_suffix(".json").unwrap_or(&name);
            file.with_file_name(format!("{base}.{ext}"))
        }
    };
    write_file(&target, text.as_bytes())?;
    ui.say(format!("wrote {}", target.display()));
    ui.document(&json!({ "out": target.display().to_string() }));
    Ok(OK)
}

fn token(var: &str) -> Result<String, Failure> {
    match std::env::var(var) {
        Ok(t) if !t.trim().is_empty() => Ok(t),
        Ok(_) => Err(Failure::config(format!(
            "environment variable {var} is empty"
        ))),
        Err(_) => Err(Failure::config(format!(
            "environment variable {var} is not set"
        ))),
    }
}

pub fn push(ui: &Ui, url: &str, token_env: &str) -> Result<u8, Failure> {
    let ws = workspace()?;
    let t = token(token_env)?;
    let r = remote::push(&store(&ws), url, &t)?;
    ui.say(format!(
        "pushed {} object(s), {} already present",
        r.transferred.len(),
        r.skipped.len()
    ));
    ui.document(&json!({ "transferred": r.transferred, "skipped": r.skipped }));
    Ok(OK)
}

pub fn pull(ui: &Ui, url: &str, token_env: &str, checkout: bool) -> Result<u8, Failure> {
    let ws = workspace()?;
    let lock = load_lock(&ws)?.ok_or_else(|| Failure::config("no lock file; nothing to pull"))?;
    let t = token(token_env)?;
    let st = store(&ws);

    let mut wanted: BTreeMap<String, ObjectRef> = BTreeMap::new();
    let mut digests = Vec::new();
    for rec in lock.stages.values() {
        for (path, r) in &rec.outs {
            wanted.insert(path.clone(), r.clone());
            digests.push(r.sha256_hex().to_string());
        }
        for r in rec.stdout.iter().chain(rec.stderr.iter()) {
            digests.push(r.sha256_hex().to_string());
        }
    }
    digests.sort();
    digests.dedup();
    let mut report = remote::pull(&st, url, &t, &digests)?;
    let mut members = Vec::new();
    for r in wanted.values() {
        if r.media_type.as_deref() == Some(MANIFEST_MEDIA_TYPE) {
            for (_, sha) in parse_manifest(&st.get(r.sha256_hex())?)? {
                members.push(sha);
            }
        }
    }
    members.sort();
    members.dedup();
    let more = remote::pull(&st, url, &t, &members)?;
    report.transferred.extend(more.transferred);
    report.skipped.extend(more.skipped);
    ui.say(format!(
        "pulled {} object(s), {} already present",
        report.transferred.len(),
        report.skipped.len()
    ));

    let mut restored = Vec::new();
    if checkout {
        for (path, r) in &wanted {
            if hash_path(&ws, path)?.is_none() {
                checkout_path(&st, &ws, path, r)?;
                restored.push(path.clone());
                ui.say(format!("restored {path}"));
            }
        }
    }
    ui.document(&json!({
        "transferred": report.transferred,
        "skipped": report.skipped,
        "restored": restored,
    }));
    Ok(OK)
}
