use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::SoftwareRef;
use super::PipelineError;
use crate::canonical;
use crate::cas::ObjectRef;
use crate::provgraph::Literal;

pub const LOCK_FILE: &str = "aimp.lock";
pub const LOCK_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Fresh,
    Cached,
    Failed,
}

impl std::fmt::Display for StageStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StageStatus::Fresh => "fresh",
            StageStatus::Cached => "cached",
            StageStatus::Failed => "failed",
        })
    }
}

/// The last accepted execution of one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LockRecord {
    pub fingerprint: String,
    pub command: String,
    pub deps: BTreeMap<String, ObjectRef>,
    pub outs: BTreeMap<String, ObjectRef>,
    pub params: BTreeMap<String, Literal>,
    #[serde(default)]
    pub tool: Option<SoftwareRef>,
    pub exit_code: i32,
    pub started_at: String,
    pub ended_at: String,
    #[serde(default)]
    pub stdout: Option<ObjectRef>,
    #[serde(default)]
    pub stderr: Option<ObjectRef>,
    pub status: StageStatus,
}

impl LockRecord {
    pub fn succeeded(&self) -> bool {
        self.status != StageStatus::Failed && self.exit_code == 0
    }

    pub fn duration_ms(&self) -> Option<i64> {
        let s = chrono::DateTime::parse_from_rfc3339(&self.started_at).ok()?;
        let e = chrono::DateTime::parse_from_rfc3339(&self.ended_at).ok()?;
        Some((e - s).num_milliseconds())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LockFile {
    pub format_version: String,
    pub workspace_id: String,
    #[serde(default)]
    pub params_file: Option<ObjectRef>,
    pub stages: BTreeMap<String, LockRecord>,
}

impl LockFile {
    pub fn new(workspace_id: impl Into<String>) -> Self {
        Self {
            format_version: LOCK_FORMAT_VERSION.into(),
            workspace_id: workspace_id.into(),
            params_file: None,
            stages: BTreeMap::new(),
        }
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        canonical::to_canonical(self).expect("lock file serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, PipelineError> {
        let lock: LockFile =
            serde_json::from_slice(bytes).map_err(|e| PipelineError::LockSyntax(e.to_string()))?;
        if lock.format_version != LOCK_FORMAT_VERSION {
            return Err(PipelineError::LockSyntax(format!(
                "unsupported lock format version '{}'",
                lock.format_version
            )));
        }
        Ok(lock)
    }

    /// `Ok(None)` when there is no lock file yet.
    pub fn load(path: &Path) -> Result<Option<Self>, PipelineError> {
        match std::fs::read(path) {
            Ok(bytes) => Self::from_json(&bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(PipelineError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
        }
    }

    /// Write atomically: a temp file in the same directory renamed over the
    /// target.
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let io = |e: std::io::Error| PipelineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(&self.to_canonical_json()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::hash_bytes;

    fn record() -> LockRecord {
        LockRecord {
            fingerprint: "f".repeat(64),
            command: "sh x.sh".into(),
            deps: [("x.sh".to_string(), hash_bytes(b"x"))].into(),
            outs: [("out".to_string(), hash_bytes(b"o"))].into(),
            params: [("image_size".to_string(), Literal::integer(256))].into(),
            tool: None,
            exit_code: 0,
            started_at: "2026-01-01T00:00:00.000Z".into(),
            ended_at: "2026-01-01T00:00:01.500Z".into(),
            stdout: Some(hash_bytes(b"")),
            stderr: None,
            status: StageStatus::Fresh,
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(LOCK_FILE);
        assert_eq!(LockFile::load(&path).unwrap(), None);
        let mut lock = LockFile::new("abc");
        lock.stages.insert("A".into(), record());
        lock.save(&path).unwrap();
        let back = LockFile::load(&path).unwrap().unwrap();
        assert_eq!(back, lock);
        assert_eq!(std::fs::read(&path).unwrap(), lock.to_canonical_json());
        assert_eq!(back.stages["A"].duration_ms(), Some(1500));
    }

    #[test]
    fn rejects_other_versions() {
        let mut lock = LockFile::new("abc");
        lock.format_version = "2".into();
        assert!(LockFile::from_json(&lock.to_canonical_json()).is_err());
    }
}
