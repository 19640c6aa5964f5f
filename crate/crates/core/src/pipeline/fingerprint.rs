use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};
use walkdir::WalkDir;

use super::spec::{ParamsFile, StageSpec};
use super::PipelineError;
use crate::canonical;
use crate::cas::{hash_bytes, hash_file, ObjectRef, Store};
use crate::provgraph::Literal;

/// Media type recorded on directory manifests.
pub const MANIFEST_MEDIA_TYPE: &str = "application/vnd.aimp.manifest+json";

/// Files below `dir` as sorted (relative path, object) pairs.
fn walk(dir: &Path) -> Result<Vec<(String, std::path::PathBuf)>, PipelineError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        if entry.file_type().is_file() {
            let rel = entry
                .path()
                .strip_prefix(dir)
                .expect("walk stays below its root")
                .to_string_lossy()
                .replace('\\', "/");
            files.push((rel, entry.path().to_path_buf()));
        }
    }
    files.sort();
    Ok(files)
}

fn manifest_bytes(entries: &[(String, String)]) -> Vec<u8> {
    let v: Vec<Value> = entries.iter().map(|(p, h)| json!([p, h])).collect();
    canonical::to_vec(&Value::Array(v))
}

fn missing(rel: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: rel.to_string(),
        message: e.to_string(),
    }
}

/// Content address of a workspace path. A file hashes as itself; a
/// directory hashes as the canonical JSON manifest `[[relpath, sha256], ...]`
/// of the files below it. `None` when the path does not exist.
pub fn hash_path(workspace: &Path, rel: &str) -> Result<Option<ObjectRef>, PipelineError> {
    let full = workspace.join(rel);
    let Ok(meta) = std::fs::metadata(&full) else {
        return Ok(None);
    };
    if meta.is_dir() {
        let mut entries = Vec::new();
        for (p, abs) in walk(&full)? {
            let r = hash_file(&abs).map_err(|e| missing(rel, e))?;
            entries.push((p, r.sha256_hex().to_string()));
        }
        Ok(Some(
            hash_bytes(&manifest_bytes(&entries)).with_media_type(MANIFEST_MEDIA_TYPE),
        ))
    } else {
        hash_file(&full).map(Some).map_err(|e| missing(rel, e))
    }
}

/// Like [`hash_path`], but copies the content (and for directories every
/// file plus the manifest) into the store.
pub fn store_path(
    store: &Store,
    workspace: &Path,
    rel: &str,
) -> Result<Option<ObjectRef>, PipelineError> {
    let full = workspace.join(rel);
    let Ok(meta) = std::fs::metadata(&full) else {
        return Ok(None);
    };
    if meta.is_dir() {
        let mut entries = Vec::new();
        for (p, abs) in walk(&full)? {
            let r = store.put_file(&abs).map_err(|e| missing(rel, e))?;
            entries.push((p, r.sha256_hex().to_string()));
        }
        let r = store
            .put_bytes(&manifest_bytes(&entries))
            .map_err(|e| missing(rel, e))?;
        Ok(Some(r.with_media_type(MANIFEST_MEDIA_TYPE)))
    } else {
        store.put_file(&full).map(Some).map_err(|e| missing(rel, e))
    }
}

/// Entries of a directory manifest as `(relpath, sha256)` pairs.
pub fn parse_manifest(bytes: &[u8]) -> Result<Vec<(String, String)>, PipelineError> {
    let bad = |m: String| PipelineError::Store(format!("malformed directory manifest: {m}"));
    let entries: Vec<(String, String)> =
        serde_json::from_slice(bytes).map_err(|e| bad(e.to_string()))?;
    for (p, _) in &entries {
        if super::spec::normalize_path(p)? != *p {
            return Err(bad(format!("entry '{p}' is not normalized")));
        }
    }
    Ok(entries)
}

/// Write the content recorded for `rel` from the store into the workspace,
/// expanding directory manifests. Every byte is re-verified on the way out.
pub fn checkout_path(
    store: &Store,
    workspace: &Path,
    rel: &str,
    r: &ObjectRef,
) -> Result<(), PipelineError> {
    let store_err = |e: crate::cas::CasError| PipelineError::Store(e.to_string());
    let write = |path: &Path, data: &[u8]| -> Result<(), PipelineError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| missing(rel, e))?;
        }
        std::fs::write(path, data).map_err(|e| missing(rel, e))
    };
    let data = store.get(r.sha256_hex()).map_err(store_err)?;
    let full = workspace.join(rel);
    if r.media_type.as_deref() == Some(MANIFEST_MEDIA_TYPE) {
        for (p, sha) in parse_manifest(&data)? {
            write(&full.join(&p), &store.get(&sha).map_err(store_err)?)?;
        }
        Ok(())
    } else {
        write(&full, &data)
    }
}

/// A stage fingerprint together with the inputs it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub value: String,
    pub deps: BTreeMap<String, ObjectRef>,
    pub params: BTreeMap<String, Literal>,
}

/// The fingerprint document: command, dep digests, referenced params,
/// declared outs and tool, hashed as canonical JSON.
pub fn fingerprint_value(
    stage: &StageSpec,
    deps: &BTreeMap<String, ObjectRef>,
    params: &BTreeMap<String, Literal>,
) -> String {
    let dep_pairs: Vec<Value> = deps
        .iter()
        .map(|(p, r)| json!([p, r.sha256_hex()]))
        .collect();
    let param_pairs: Vec<Value> = params
        .iter()
        .map(|(k, v)| json!([k, serde_json::to_value(v).expect("literal serializes")]))
        .collect();
    let mut outs = stage.outs.clone();
    outs.sort();
    let doc = json!({
        "command": stage.command,
        "deps": dep_pairs,
        "params": param_pairs,
        "outs": outs,
        "tool": stage.tool.as_ref().map(|t| json!({"name": t.name, "version": t.version})),
    });
    canonical::sha256_hex(&doc)
}

/// Referenced params of `stage`, expanded to leaves.
pub fn stage_params(
    stage: &StageSpec,
    params: &ParamsFile,
) -> Result<BTreeMap<String, Literal>, PipelineError> {
    let mut out = BTreeMap::new();
    for key in &stage.params {
        out.extend(params.select(key)?);
    }
    Ok(out)
}

pub fn fingerprint_stage(
    stage: &StageSpec,
    params: &ParamsFile,
    workspace: &Path,
) -> Result<Fingerprint, PipelineError> {
    let mut deps = BTreeMap::new();
    for d in &stage.deps {
        let r = hash_path(workspace, d)?.ok_or_else(|| PipelineError::MissingDep {
            stage: stage.name.clone(),
            path: d.clone(),
        })?;
        deps.insert(d.clone(), r);
    }
    let params = stage_params(stage, params)?;
    Ok(Fingerprint {
        value: fingerprint_value(stage, &deps, &params),
        deps,
        params,
    })
}
