use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::PipelineError;
use crate::provgraph::Literal;

pub const PIPELINE_FILE: &str = "aimp-pipeline.yaml";
pub const DEFAULT_PARAMS_FILE: &str = "params.yaml";

/// Name and version of a piece of software.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftwareRef {
    pub name: String,
    #[serde(default)]
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    pub name: String,
    pub command: String,
    pub deps: Vec<String>,
    pub outs: Vec<String>,
    pub params: Vec<String>,
    pub tool: Option<SoftwareRef>,
}

/// Which stage trains the model and where its products land.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct TrainingSpec {
    pub stage: String,
    /// Model artifact; must be an out of `stage`.
    pub model: String,
    /// JSON object of metric name to number; must be an out of `stage`.
    #[serde(default)]
    pub metrics: Option<String>,
    /// Dataset the metrics were computed on: a workspace path or an IRI.
    #[serde(default)]
    pub eval_data: Option<String>,
    /// Training script; defaults to the first dep of `stage`.
    #[serde(default)]
    pub script: Option<String>,
    #[serde(default)]
    pub environment: Vec<SoftwareRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineSpec {
    pub stages: Vec<StageSpec>,
    pub params_file: String,
    pub training: Option<TrainingSpec>,
    /// Short content hash of the normalized spec. Minted IRIs are scoped by
    /// it, so they do not depend on where the workspace lives.
    pub workspace_id: String,
}

impl PipelineSpec {
    pub fn stage(&self, name: &str) -> Option<&StageSpec> {
        self.stages.iter().find(|s| s.name == name)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    #[serde(default)]
    params: Option<String>,
    #[serde(default)]
    stages: Option<StageList>,
    #[serde(default)]
    training: Option<TrainingSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage {
    cmd: String,
    #[serde(default)]
    deps: Vec<String>,
    #[serde(default)]
    outs: Vec<String>,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    tool: Option<SoftwareRef>,
}

/// Stage map kept in document order, duplicates included.
struct StageList(Vec<(String, RawStage)>);

impl<'de> Deserialize<'de> for StageList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = StageList;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a mapping of stage name to stage")
            }
            fn visit_unit<E>(self) -> Result<StageList, E> {
                Ok(StageList(Vec::new()))
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<StageList, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, RawStage>()? {
                    out.push((k, v));
                }
                Ok(StageList(out))
            }
        }
        d.deserialize_any(V)
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Normalize a workspace-relative path: `./` segments and trailing slashes
/// are dropped. Absolute paths, `..` segments, backslashes and empty paths
/// are rejected.
pub fn normalize_path(path: &str) -> Result<String, PipelineError> {
    let bad = || PipelineError::BadPath(path.to_string());
    if path.starts_with('/') || path.contains('\\') || path.contains('\0') {
        return Err(bad());
    }
    let mut parts = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => return Err(bad()),
            s => parts.push(s),
        }
    }
    if parts.is_empty() {
        return Err(bad());
    }
    Ok(parts.join("/"))
}

/// `a` equals `b` or is a directory containing it.
pub(crate) fn covers(a: &str, b: &str) -> bool {
    a == b || (b.len() > a.len() && b.starts_with(a) && b.as_bytes()[a.len()] == b'/')
}

pub fn parse_pipeline(text: &str) -> Result<PipelineSpec, PipelineError> {
    let raw: RawPipeline = serde_yaml::from_str(text).map_err(|e| PipelineError::Syntax {
        line: e.location().map(|l| l.line()).unwrap_or(0),
        message: e.to_string(),
    })?;
    let mut stages = Vec::new();
    let mut names = BTreeSet::new();
    let mut producers: Vec<(String, String)> = Vec::new();
    for (name, st) in raw.stages.map(|s| s.0).unwrap_or_default() {
        if !valid_name(&name) {
            return Err(PipelineError::InvalidStageName(name));
        }
        if !names.insert(name.clone()) {
            return Err(PipelineError::DuplicateStage(name));
        }
        if st.cmd.trim().is_empty() {
            return Err(PipelineError::EmptyCommand(name));
        }
        let norm = |v: Vec<String>| -> Result<Vec<String>, PipelineError> {
            let mut out = Vec::new();
            for p in v {
                let p = normalize_path(&p)?;
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            Ok(out)
        };
        let deps = norm(st.deps)?;
        let outs = norm(st.outs)?;
        for d in &deps {
            if let Some(o) = outs.iter().find(|o| covers(o, d) || covers(d, o)) {
                return Err(PipelineError::DepIsOut {
                    stage: name.clone(),
                    path: if o == d {
                        o.clone()
                    } else {
                        format!("{d} / {o}")
                    },
                });
            }
        }
        for o in &outs {
            if let Some((_, other)) = producers.iter().find(|(p, _)| covers(p, o) || covers(o, p)) {
                return Err(PipelineError::DuplicateOut {
                    path: o.clone(),
                    first: other.clone(),
                    second: name.clone(),
                });
            }
        }
        for o in &outs {
            producers.push((o.clone(), name.clone()));
        }
        let mut params = Vec::new();
        for key in st.params {
            if key.trim().is_empty() {
                return Err(PipelineError::MissingParam(key));
            }
            if !params.contains(&key) {
                params.push(key);
            }
        }
        stages.push(StageSpec {
            name,
            command: st.cmd,
            deps,
            outs,
            params,
            tool: st.tool,
        });
    }
    let params_file = normalize_path(raw.params.as_deref().unwrap_or(DEFAULT_PARAMS_FILE))?;
    let mut spec = PipelineSpec {
        stages,
        params_file,
        training: None,
        workspace_id: String::new(),
    };
    if let Some(t) = &raw.training {
        spec.training = Some(check_training(&spec, t)?);
    }
    spec.workspace_id = workspace_id(&spec);
    Ok(spec)
}

fn workspace_id(spec: &PipelineSpec) -> String {
    let stages: Vec<serde_json::Value> = spec
        .stages
        .iter()
        .map(|s| {
            serde_json::json!({
                "name": s.name,
                "cmd": s.command,
                "deps": s.deps,
                "outs": s.outs,
                "params": s.params,
                "tool": s.tool,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "stages": stages,
        "params": spec.params_file,
        "training": spec.training,
    });
    crate::canonical::sha256_hex(&doc)[..16].to_string()
}

fn check_training(spec: &PipelineSpec, t: &TrainingSpec) -> Result<TrainingSpec, PipelineError> {
    let bad = |m: String| PipelineError::Training(m);
    let stage = spec
        .stage(&t.stage)
        .ok_or_else(|| bad(format!("stage '{}' is not defined", t.stage)))?;
    let model = normalize_path(&t.model)?;
    if !stage.outs.contains(&model) {
        return Err(bad(format!(
            "model '{model}' is not an out of '{}'",
            t.stage
        )));
    }
    let metrics = match &t.metrics {
        Some(m) => {
            let m = normalize_path(m)?;
            if !stage.outs.contains(&m) {
                return Err(bad(format!("metrics '{m}' is not an out of '{}'", t.stage)));
            }
            Some(m)
        }
        None => None,
    };
    let eval_data = match &t.eval_data {
        Some(d) if d.contains("://") => Some(d.clone()),
        Some(d) => Some(normalize_path(d)?),
        None => None,
    };
    let script = match &t.script {
        Some(s) => {
            let s = normalize_path(s)?;
            if !stage.deps.contains(&s) {
                return Err(bad(format!("script '{s}' is not a dep of '{}'", t.stage)));
            }
            Some(s)
        }
        None => stage.deps.first().cloned(),
    };
    Ok(TrainingSpec {
        stage: t.stage.clone(),
        model,
        metrics,
        eval_data,
        script,
        environment: t.environment.clone(),
    })
}

/// Parameters flattened to dotted keys. Sequence items get their index as
/// key segment (`layers.0`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamsFile {
    pub values: BTreeMap<String, Literal>,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let doc: serde_yaml::Value =
            serde_yaml::from_str(text).map_err(|e| PipelineError::ParamsSyntax {
                line: e.location().map(|l| l.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
        let mut values = BTreeMap::new();
        flatten("", &doc, &mut values)?;
        Ok(Self { values })
    }

    /// Values for `key`: the leaf itself, or every leaf below it.
    pub fn select(&self, key: &str) -> Result<BTreeMap<String, Literal>, PipelineError> {
        let found: BTreeMap<String, Literal> = self
            .values
            .iter()
            .filter(|(k, _)| {
                k.as_str() == key
                    || (k.len() > key.len()
                        && k.starts_with(key)
                        && k.as_bytes()[key.len()] == b'.')
            })
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if found.is_empty() {
            return Err(PipelineError::MissingParam(key.to_string()));
        }
        Ok(found)
    }
}

fn flatten(
    prefix: &str,
    v: &serde_yaml::Value,
    out: &mut BTreeMap<String, Literal>,
) -> Result<(), PipelineError> {
    use serde_yaml::Value as Y;
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    let leaf = |lit: Literal, out: &mut BTreeMap<String, Literal>| {
        out.insert(prefix.to_string(), lit);
    };
    match v {
        Y::Null => Ok(()),
        Y::Bool(b) => {
            leaf(Literal::boolean(*b), out);
            Ok(())
        }
        Y::Number(n) => {
            let lit = match n.as_i64() {
                Some(i) => Literal::integer(i),
                None => Literal::decimal(n.as_f64().unwrap_or(f64::NAN)).map_err(|_| {
                    PipelineError::ParamsSyntax {
                        line: 0,
                        message: format!("{prefix}: non-finite number"),
                    }
                })?,
            };
            leaf(lit, out);
            Ok(())
        }
        Y::String(s) => {
            leaf(Literal::string(s.clone()), out);
            Ok(())
        }
        Y::Sequence(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), item, out)?;
            }
            Ok(())
        }
        Y::Mapping(m) => {
            for (k, item) in m {
                let key = match k {
                    Y::String(s) => s.clone(),
                    Y::Number(n) => n.to_string(),
                    Y::Bool(b) => b.to_string(),
                    _ => {
                        return Err(PipelineError::ParamsSyntax {
                            line: 0,
                            message: format!("{prefix}: unsupported key"),
                        })
                    }
                };
                flatten(&join(&key), item, out)?;
            }
            Ok(())
        }
        Y::Tagged(t) => flatten(prefix, &t.value, out),
    }
}
