use std::collections::BTreeMap;

use super::dag::build_dag;
use super::fingerprint::MANIFEST_MEDIA_TYPE;
use super::lock::LockFile;
use super::spec::PipelineSpec;
use super::PipelineError;
use crate::cas::ObjectRef;
use crate::provgraph::vocab::default_prefixes;
use crate::provgraph::{Iri, Literal, ProvClass, ProvEdge, ProvGraph, ProvNode, Relation};

const SCRIPT_EXTENSIONS: [&str; 7] = ["sh", "py", "r", "R", "jl", "ipynb", "m"];

pub(crate) fn key(s: &str) -> Iri {
    Iri::new(s).expect("static attribute key is a valid IRI")
}

pub(crate) fn checksum_attrs(node: ProvNode, r: &ObjectRef) -> ProvNode {
    let node = node
        .with_attr(key("spdx:checksumValue"), Literal::string(r.md5_hex()))
        .with_attr(key("aimp:sha256"), Literal::string(r.sha256_hex()))
        .with_attr(key("aimp:byteSize"), Literal::integer(r.size as i64));
    match &r.media_type {
        Some(m) => node.with_attr(key("aimp:mediaType"), Literal::string(m.clone())),
        None => node,
    }
}

/// IRIs of the nodes [`record_execution`] mints, for callers that attach
/// further provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionIris {
    pub study: Iri,
    pub experiment: Iri,
    pub pipeline: Iri,
    pub agent: Option<Iri>,
    /// Stage name to its StageExecution activity.
    pub executions: BTreeMap<String, Iri>,
    /// (path, sha256) to its artifact entity.
    pub artifacts: BTreeMap<(String, String), Iri>,
}

impl ExecutionIris {
    pub fn artifact(&self, path: &str, sha256: &str) -> Option<&Iri> {
        self.artifacts.get(&(path.to_string(), sha256.to_string()))
    }
}

fn artifact_class(spec: &PipelineSpec, path: &str, r: &ObjectRef) -> ProvClass {
    let training = spec.training.as_ref();
    if training.is_some_and(|t| t.model == path) {
        return ProvClass::Model;
    }
    if path == spec.params_file {
        return ProvClass::ParameterSet;
    }
    if training.and_then(|t| t.script.as_deref()) == Some(path) {
        return ProvClass::Script;
    }
    let ext = path.rsplit_once('.').map(|(_, e)| e).unwrap_or("");
    if r.media_type.as_deref() != Some(MANIFEST_MEDIA_TYPE) && SCRIPT_EXTENSIONS.contains(&ext) {
        return ProvClass::Script;
    }
    ProvClass::DataFile
}

/// Add the provenance of a completed run to `graph`: Study, Experiment and
/// Pipeline nodes, and per stage a Stage plan plus a StageExecution activity
/// linked to its input and output artifacts.
pub fn record_execution(
    lock: &LockFile,
    spec: &PipelineSpec,
    graph: &ProvGraph,
) -> Result<ProvGraph, PipelineError> {
    record_execution_with_iris(lock, spec, graph).map(|(g, _)| g)
}

pub fn record_execution_with_iris(
    lock: &LockFile,
    spec: &PipelineSpec,
    graph: &ProvGraph,
) -> Result<(ProvGraph, ExecutionIris), PipelineError> {
    let dag = build_dag(spec)?;
    for s in dag.order() {
        if !lock.stages.get(s).is_some_and(|r| r.succeeded()) {
            return Err(PipelineError::IncompleteLock(s.clone()));
        }
    }
    let ws = lock.workspace_id.as_str();
    let mut g = graph.clone();
    for (p, ns) in default_prefixes() {
        g.add_prefix(p, ns)?;
    }

    let study = Iri::mint(ws, "study", 1);
    let experiment = Iri::mint(ws, "experiment", 1);
    let pipeline = Iri::mint(ws, "pipeline", 1);
    g.add_node(ProvNode::new(study.clone(), ProvClass::Study))?;
    g.add_node(
        ProvNode::new(experiment.clone(), ProvClass::Experiment)
            .with_attr(key("aimp:workspaceId"), Literal::string(ws)),
    )?;
    g.add_node(
        ProvNode::new(pipeline.clone(), ProvClass::Pipeline).with_attr(
            key("aimp:stageCount"),
            Literal::integer(dag.order().len() as i64),
        ),
    )?;
    g.add_edge(ProvEdge::new(
        experiment.clone(),
        Relation::IsPartOf,
        study.clone(),
    ))?;
    g.add_edge(ProvEdge::new(
        pipeline.clone(),
        Relation::IsPartOf,
        experiment.clone(),
    ))?;

    let mut iris = ExecutionIris {
        study,
        experiment,
        pipeline: pipeline.clone(),
        agent: None,
        executions: BTreeMap::new(),
        artifacts: BTreeMap::new(),
    };
    if dag.order().is_empty() {
        return Ok((g, iris));
    }

    let agent = Iri::mint(ws, "agent", 1);
    g.add_node(
        ProvNode::new(agent.clone(), ProvClass::SoftwareAgent)
            .with_attr(key("foaf:name"), Literal::string("aimp"))
            .with_attr(key("aimp:version"), Literal::string(crate::TOOL_VERSION)),
    )?;
    iris.agent = Some(agent.clone());

    // one entity per distinct (path, content), numbered in sorted order
    let mut artifacts: BTreeMap<(String, String), ObjectRef> = BTreeMap::new();
    for name in dag.order() {
        let r = &lock.stages[name];
        for (p, o) in r.deps.iter().chain(r.outs.iter()) {
            artifacts.insert((p.clone(), o.sha256_hex().to_string()), o.clone());
        }
    }
    for (n, ((path, sha), r)) in artifacts.iter().enumerate() {
        let id = Iri::mint(ws, "artifact", n + 1);
        let node = ProvNode::new(id.clone(), artifact_class(spec, path, r))
            .with_attr(key("aimp:path"), Literal::string(path.clone()));
        g.add_node(checksum_attrs(node, r))?;
        iris.artifacts.insert((path.clone(), sha.clone()), id);
    }

    let mut log_n = 0;
    for (i, name) in dag.order().iter().enumerate() {
        let stage = spec.stage(name).expect("dag node is a stage");
        let r = &lock.stages[name];
        let plan = Iri::mint(ws, "stage", i + 1);
        let exec = Iri::mint(ws, "execution", i + 1);
        g.add_node(
            ProvNode::new(plan.clone(), ProvClass::Stage)
                .with_attr(key("dct:title"), Literal::string(name.clone()))
                .with_attr(key("aimp:command"), Literal::string(stage.command.clone()))
                .with_attr(key("aimp:rank"), Literal::integer(i as i64)),
        )?;
        g.add_edge(ProvEdge::new(
            plan.clone(),
            Relation::IsPartOf,
            pipeline.clone(),
        ))?;

        let mut node = ProvNode::new(exec.clone(), ProvClass::StageExecution)
            .with_attr(key("aimp:stageName"), Literal::string(name.clone()))
            .with_attr(key("aimp:command"), Literal::string(r.command.clone()))
            .with_attr(
                key("aimp:fingerprint"),
                Literal::string(r.fingerprint.clone()),
            )
            .with_attr(
                key("aimp:exitCode"),
                Literal::integer(i64::from(r.exit_code)),
            );
        for (attr, value) in [
            ("prov:startedAtTime", &r.started_at),
            ("prov:endedAtTime", &r.ended_at),
        ] {
            if let Ok(lit) = Literal::new(value.clone(), crate::provgraph::Datatype::DateTime, None)
            {
                node = node.with_attr(key(attr), lit);
            }
        }
        if let Some(t) = &r.tool {
            node = node
                .with_attr(key("aimp:toolName"), Literal::string(t.name.clone()))
                .with_attr(key("aimp:toolVersion"), Literal::string(t.version.clone()));
        }
        for (k, v) in &r.params {
            let attr =
                Iri::new(format!("hparam:{k}")).map_err(|e| PipelineError::Graph(e.into()))?;
            node = node.with_attr(attr, v.clone());
        }
        g.add_node(node)?;
        g.add_edge(ProvEdge::new(exec.clone(), Relation::Used, plan))?;
        g.add_edge(ProvEdge::new(
            exec.clone(),
            Relation::WasAssociatedWith,
            agent.clone(),
        ))?;
        for (p, o) in &r.deps {
            let a = iris.artifacts[&(p.clone(), o.sha256_hex().to_string())].clone();
            g.add_edge(ProvEdge::new(exec.clone(), Relation::HasInput, a))?;
        }
        for (p, o) in &r.outs {
            let a = iris.artifacts[&(p.clone(), o.sha256_hex().to_string())].clone();
            g.add_edge(ProvEdge::new(exec.clone(), Relation::HasOutput, a.clone()))?;
            g.add_edge(ProvEdge::new(a, Relation::WasGeneratedBy, exec.clone()))?;
        }
        for (stream, log) in [("stdout", &r.stdout), ("stderr", &r.stderr)] {
            let Some(log) = log else { continue };
            log_n += 1;
            let id = Iri::mint(ws, "log", log_n);
            let node = ProvNode::new(id.clone(), ProvClass::LogFile)
                .with_attr(key("aimp:stream"), Literal::string(stream));
            g.add_node(checksum_attrs(node, log))?;
            g.add_edge(ProvEdge::new(id, Relation::WasGeneratedBy, exec.clone()))?;
        }
        iris.executions.insert(name.clone(), exec);
    }
    Ok((g, iris))
}
