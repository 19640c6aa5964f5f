use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PassportError;
use crate::cas::{ObjectRef, Store};
use crate::pipeline::{hash_path, LockFile, PipelineSpec};
use crate::provgraph::Literal;

/// What an evaluation was computed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DatasetRef {
    Iri(String),
    Object(ObjectRef),
}

/// One evaluation measure. The value is kept as its shortest round-trip
/// decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Evaluation {
    pub metric_name: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_ref: Option<DatasetRef>,
}

impl Evaluation {
    pub fn new(
        metric_name: impl Into<String>,
        value: f64,
        dataset_ref: Option<DatasetRef>,
    ) -> Result<Self, PassportError> {
        let metric_name = metric_name.into();
        let lit = Literal::decimal(value).map_err(|_| {
            PassportError::Training(format!("metric '{metric_name}' is not finite"))
        })?;
        Ok(Self {
            metric_name,
            value: lit.lexical().to_string(),
            dataset_ref,
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.value.parse().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Package {
    pub package_name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TrainingRecord {
    pub stage: String,
    pub model_path: String,
    pub hyperparameters: BTreeMap<String, Literal>,
    pub evaluations: Vec<Evaluation>,
    pub model_artifact: ObjectRef,
    pub environment: Vec<Package>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implementation_ref: Option<ObjectRef>,
}

/// Flatten a metrics document into `(dotted.name, value)` pairs. Only
/// numbers are metrics; other leaves are ignored.
pub fn parse_metrics(bytes: &[u8]) -> Result<Vec<(String, f64)>, PassportError> {
    let v: Value = serde_json::from_slice(bytes)
        .map_err(|e| PassportError::Training(format!("metrics file is not JSON: {e}")))?;
    if !v.is_object() {
        return Err(PassportError::Training(
            "metrics file must hold a JSON object".into(),
        ));
    }
    let mut out = Vec::new();
    flatten("", &v, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, f64)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                out.push((prefix.to_string(), f));
            }
        }
        _ => {}
    }
}

fn read_artifact(
    store: &Store,
    workspace: &Path,
    path: &str,
    r: &ObjectRef,
) -> Result<Vec<u8>, PassportError> {
    if let Ok(bytes) = store.get(r.sha256_hex()) {
        return Ok(bytes);
    }
    let on_disk = hash_path(workspace, path).map_err(PassportError::Pipeline)?;
    if on_disk.as_ref().map(|o| o.sha256_hex()) == Some(r.sha256_hex()) {
        return std::fs::read(workspace.join(path)).map_err(|e| PassportError::Io {
            path: path.to_string(),
            message: e.to_string(),
        });
    }
    Err(PassportError::Training(format!(
        "content of '{path}' ({}) is neither in the store nor in the workspace",
        r.sha256_hex()
    )))
}

/// Build the training record from the lock entry of the training stage.
pub fn training_record(
    spec: &PipelineSpec,
    lock: &LockFile,
    store: &Store,
    workspace: &Path,
) -> Result<TrainingRecord, PassportError> {
    let t = spec
        .training
        .as_ref()
        .ok_or_else(|| PassportError::Training("the pipeline has no training section".into()))?;
    let rec = lock
        .stages
        .get(&t.stage)
        .filter(|r| r.succeeded())
        .ok_or_else(|| PassportError::IncompleteLock(t.stage.clone()))?;
    let model_artifact = rec.outs.get(&t.model).cloned().ok_or_else(|| {
        PassportError::Training(format!(
            "model '{}' is not an out of stage '{}'",
            t.model, t.stage
        ))
    })?;

    let dataset_ref = match &t.eval_data {
        Some(d) if d.contains("://") => Some(DatasetRef::Iri(d.clone())),
        Some(d) => lock
            .stages
            .values()
            .find_map(|r| r.outs.get(d).or_else(|| r.deps.get(d)))
            .cloned()
            .map(DatasetRef::Object),
        None => None,
    };
    let mut evaluations = Vec::new();
    if let Some(m) = &t.metrics {
        let r = rec.outs.get(m).ok_or_else(|| {
            PassportError::Training(format!(
                "metrics '{m}' is not an out of stage '{}'",
                t.stage
            ))
        })?;
        for (name, value) in parse_metrics(&read_artifact(store, workspace, m, r)?)? {
            evaluations.push(Evaluation::new(name, value, dataset_ref.clone())?);
        }
    }
    let implementation_ref = match &t.script {
        Some(s) => Some(rec.deps.get(s).cloned().ok_or_else(|| {
            PassportError::Training(format!("script '{s}' is not a dep of stage '{}'", t.stage))
        })?),
        None => None,
    };
    let mut environment: Vec<Package> = t
        .environment
        .iter()
        .map(|p| Package {
            package_name: p.name.clone(),
            version: p.version.clone(),
        })
        .collect();
    environment.sort();
    Ok(TrainingRecord {
        stage: t.stage.clone(),
        model_path: t.model.clone(),
        hyperparameters: rec.params.clone(),
        evaluations,
        model_artifact,
        environment,
        implementation_ref,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_flatten_and_sort() {
        let m = parse_metrics(br#"{"dice": 0.81, "val": {"loss": 0.25, "note": "x"}, "auc": 1}"#)
            .unwrap();
        assert_eq!(
            m,
            vec![
                ("auc".into(), 1.0),
                ("dice".into(), 0.81),
                ("val.loss".into(), 0.25)
            ]
        );
        assert!(parse_metrics(b"[1,2]").is_err());
    }

    #[test]
    fn evaluation_values_are_shortest_decimals() {
        assert_eq!(
            Evaluation::new("Dice", 0.1 + 0.2, None).unwrap().value,
            "0.30000000000000004"
        );
        assert_eq!(Evaluation::new("Dice", 1.0, None).unwrap().value, "1.0");
        assert_eq!(
            Evaluation::new("Dice", 0.85, None).unwrap().as_f64(),
            Some(0.85)
        );
        assert!(Evaluation::new("Dice", f64::NAN, None).is_err());
    }
}
