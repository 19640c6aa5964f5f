//! The AI Model Passport: one document binding datasets, pipeline
//! provenance, training outcome and manual declarations under a
//! content-derived identity.

mod graph;
mod identity;
mod manual;
mod training;
mod verify;


use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::canonical;
use crate::dcat::turtle::{emit_turtle, RdfLiteral, Term, Triple, RDF_TYPE};
use crate::dcat::HEALTH_NS;
use crate::dcat::{descriptor_to_triples, HarvestedDescriptor};
use crate::pipeline::{LockFile, PipelineError};
use crate::provgraph::vocab::{AIMP, DCAT, DCT};
use crate::provgraph::{GraphError, ProvClass, ProvGraph, ValidationReport};

pub use graph::{lineage_graph, metric_key};
pub use identity::{identity_body, identity_of, is_identity, IDENTITY_PREFIX};
pub use manual::{
    scaffold_manual_template, validate_manual, LearningApproach, LearningTask, ManualMetadata,
    MANUAL_FILE, REQUIRED_FIELDS,
};
pub use training::{
    parse_metrics, training_record, DatasetRef, Evaluation, Package, TrainingRecord,
};
pub use verify::{verify, Check, Outcome, VerificationReport};

pub const PASSPORT_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PassportError {
    #[error("manual metadata is missing required fields: {}", .0.join(", "))]
    ManualIncomplete(Vec<String>),
    #[error("manual metadata: {0}")]
    ManualSyntax(String),
    #[error("provenance graph is invalid: {0}")]
    InvalidGraph(ValidationReport),
    #[error("lock has no successful record for stage '{0}'")]
    IncompleteLock(String),
    #[error("embedded identity {embedded} does not match recomputed {computed}")]
    SelfInconsistent { embedded: String, computed: String },
    #[error("cannot load passport: {0}")]
    Load(String),
    #[error("training record: {0}")]
    Training(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassportFormat {
    CanonicalJson,
    Turtle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelPassport {
    pub format_version: String,
    pub identity: String,
    pub created_at: String,
    pub tool_version: String,
    pub datasets: Vec<HarvestedDescriptor>,
    pub provenance: ProvGraph,
    pub lock: LockFile,
    pub training: TrainingRecord,
    pub manual: ManualMetadata,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("passport part serializes")
}

/// Build a passport stamped with the current time.
pub fn assemble(
    descriptors: Vec<HarvestedDescriptor>,
    graph: ProvGraph,
    lock: LockFile,
    training: TrainingRecord,
    manual: ManualMetadata,
) -> Result<ModelPassport, PassportError> {
    let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    assemble_at(descriptors, graph, lock, training, manual, now)
}

pub fn assemble_at(
    descriptors: Vec<HarvestedDescriptor>,
    graph: ProvGraph,
    lock: LockFile,
    training: TrainingRecord,
    manual: ManualMetadata,
    created_at: String,
) -> Result<ModelPassport, PassportError> {
    let missing = validate_manual(&manual);
    if !missing.is_empty() {
        return Err(PassportError::ManualIncomplete(missing));
    }
    let report = graph.validate();
    if !report.is_valid() {
        return Err(PassportError::InvalidGraph(report));
    }
    if let Some((name, _)) = lock.stages.iter().find(|(_, r)| !r.succeeded()) {
        return Err(PassportError::IncompleteLock(name.clone()));
    }
    if !lock.stages.contains_key(&training.stage) {
        return Err(PassportError::IncompleteLock(training.stage.clone()));
    }
    let mut datasets = descriptors;
    datasets.sort_by(|a, b| a.descriptor.id.cmp(&b.descriptor.id));
    let mut p = ModelPassport {
        format_version: PASSPORT_FORMAT_VERSION.into(),
        identity: String::new(),
        created_at,
        tool_version: crate::TOOL_VERSION.into(),
        datasets,
        provenance: graph,
        lock,
        training,
        manual,
    };
    p.identity = p.compute_identity();
    Ok(p)
}

impl ModelPassport {
    /// The whole document as a JSON value, identity included.
    pub fn to_value(&self) -> Value {
        json!({
            "formatVersion": self.format_version,
            "identity": self.identity,
            "createdAt": self.created_at,
            "toolVersion": self.tool_version,
            "datasets": to_value(&self.datasets),
            "provenance": self.provenance.canonical_value(),
            "lock": to_value(&self.lock),
            "training": to_value(&self.training),
            "manual": to_value(&self.manual),
        })
    }

    pub fn from_value(v: &Value) -> Result<Self, PassportError> {
        let load = |e: String| PassportError::Load(e);
        let o = v
            .as_object()
            .ok_or_else(|| load("document is not a JSON object".into()))?;
        let field = |k: &str| o.get(k).ok_or_else(|| load(format!("missing field '{k}'")));
        let string = |k: &str| -> Result<String, PassportError> {
            field(k)?
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| load(format!("field '{k}' is not a string")))
        };
        let parse = |k: &str| -> Result<Value, PassportError> { field(k).cloned() };
        let known: BTreeSet<&str> = [
            "formatVersion",
            "identity",
            "createdAt",
            "toolVersion",
            "datasets",
            "provenance",
            "lock",
            "training",
            "manual",
        ]
        .into();
        if let Some(k) = o.keys().find(|k| !known.contains(k.as_str())) {
            return Err(load(format!("unknown field '{k}'")));
        }
        let format_version = string("formatVersion")?;
        if format_version != PASSPORT_FORMAT_VERSION {
            return Err(load(format!(
                "unsupported format version '{format_version}'"
            )));
        }
        let de = |k: &str, e: serde_json::Error| load(format!("{k}: {e}"));
        Ok(ModelPassport {
            format_version,
            identity: string("identity")?,
            created_at: string("createdAt")?,
            tool_version: string("toolVersion")?,
            datasets: serde_json::from_value(parse("datasets")?).map_err(|e| de("datasets", e))?,
            provenance: ProvGraph::from_json_value(field("provenance")?)
                .map_err(|e| load(format!("provenance: {e}")))?,
            lock: serde_json::from_value(parse("lock")?).map_err(|e| de("lock", e))?,
            training: serde_json::from_value(parse("training")?).map_err(|e| de("training", e))?,
            manual: serde_json::from_value(parse("manual")?).map_err(|e| de("manual", e))?,
        })
    }

    pub fn load(bytes: &[u8]) -> Result<Self, PassportError> {
        let v: Value =
            serde_json::from_slice(bytes).map_err(|e| PassportError::Load(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn load_file(path: &Path) -> Result<Self, PassportError> {
        let bytes = std::fs::read(path).map_err(|e| PassportError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::load(&bytes)
    }

    pub fn compute_identity(&self) -> String {
        identity_of(&self.to_value())
    }

    pub fn check_self_consistent(&self) -> Result<(), PassportError> {
        let computed = self.compute_identity();
        if computed == self.identity {
            Ok(())
        } else {
            Err(PassportError::SelfInconsistent {
                embedded: self.identity.clone(),
                computed,
            })
        }
    }

    pub fn to_canonical_json(&self) -> Result<Vec<u8>, PassportError> {
        self.check_self_consistent()?;
        Ok(canonical::to_vec(&self.to_value()))
    }

    pub fn serialize(&self, format: PassportFormat) -> Result<Vec<u8>, PassportError> {
        match format {
            PassportFormat::CanonicalJson => self.to_canonical_json(),
            PassportFormat::Turtle => self.to_turtle().map(String::into_bytes),
        }
    }

    /// Expanded IRI of the provenance node for the model artifact.
    pub fn model_node(&self) -> Option<String> {
        let sha_key = format!("{AIMP}sha256");
        self.provenance
            .nodes_of_class(ProvClass::Model)
            .find_map(|n| {
                let sha = n
                    .attributes
                    .iter()
                    .find(|(k, _)| {
                        self.provenance.expand(k).ok().as_deref() == Some(sha_key.as_str())
                    })?
                    .1;
                (sha.lexical() == self.training.model_artifact.sha256_hex())
                    .then(|| self.provenance.expand(&n.id).ok())
                    .flatten()
            })
    }

    pub fn hex(&self) -> &str {
        self.identity
            .strip_prefix(IDENTITY_PREFIX)
            .unwrap_or(&self.identity)
    }

    /// The provenance graph plus passport-level triples: identity, dataset
    /// descriptors and links, evaluation and manual declarations.
    pub fn to_turtle(&self) -> Result<String, PassportError> {
        self.check_self_consistent()?;
        let mut doc = self.provenance.to_turtle_doc();
        doc.prefixes.insert("healthdcatap".into(), HEALTH_NS.into());
        let subject = Term::Iri(format!("{AIMP}passport/{}", self.hex()));
        let p = |local: &str| format!("{AIMP}{local}");
        let lit = |s: &str| Term::Literal(RdfLiteral::string(s));
        let mut triples: BTreeSet<Triple> = doc.triples.drain(..).collect();
        let mut add = |pred: String, obj: Term| {
            triples.insert(Triple::new(subject.clone(), pred, obj));
        };
        add(RDF_TYPE.to_string(), Term::Iri(p("ModelPassport")));
        add(p("identity"), lit(&self.identity));
        add(p("formatVersion"), lit(&self.format_version));
        add(p("toolVersion"), lit(&self.tool_version));
        add(
            format!("{DCT}created"),
            Term::Literal(RdfLiteral::typed(
                self.created_at.clone(),
                crate::provgraph::Datatype::DateTime.xsd_iri(),
            )),
        );
        if let Some(m) = self.model_node() {
            add(p("model"), Term::Iri(m));
        }
        add(
            p("modelSha256"),
            lit(self.training.model_artifact.sha256_hex()),
        );
        for d in &self.datasets {
            add(format!("{DCAT}dataset"), Term::Iri(d.descriptor.id.clone()));
        }
        let manual = to_value(&self.manual);
        for (k, v) in manual.as_object().expect("manual is an object") {
            if let Some(s) = v.as_str().filter(|s| !s.is_empty()) {
                add(p(k), lit(s));
            }
        }
        for d in &self.datasets {
            triples.extend(descriptor_to_triples(&d.descriptor));
        }
        doc.triples = triples.into_iter().collect();
        Ok(emit_turtle(&doc))
    }
}
