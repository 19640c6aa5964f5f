use std::collections::BTreeSet;

use super::manual::ManualMetadata;
use super::training::{DatasetRef, TrainingRecord};
use super::PassportError;
use crate::dcat::HarvestedDescriptor;
use crate::pipeline::{build_dag, record_execution_with_iris, LockFile, PipelineSpec};
use crate::provgraph::{Iri, Literal, ProvClass, ProvEdge, ProvGraph, ProvNode, Relation};

fn key(s: &str) -> Iri {
    Iri::new(s).expect("static attribute key is a valid IRI")
}

/// Percent-encode everything outside `[A-Za-z0-9._-]`.
fn iri_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn metric_key(name: &str) -> Iri {
    key(&format!("aimp:metric/{}", iri_segment(name)))
}

/// The full lineage graph of a run: the executed pipeline plus the
/// harvested datasets feeding its source stages, the evaluation of the
/// model and the model owner.
pub fn lineage_graph(
    spec: &PipelineSpec,
    lock: &LockFile,
    datasets: &[HarvestedDescriptor],
    training: &TrainingRecord,
    manual: &ManualMetadata,
) -> Result<ProvGraph, PassportError> {
    let (mut g, iris) = record_execution_with_iris(lock, spec, &ProvGraph::new())?;
    let ws = lock.workspace_id.as_str();
    let dag = build_dag(spec)?;

    let mut seen = BTreeSet::new();
    for d in datasets {
        let Ok(id) = Iri::new(d.descriptor.id.clone()) else {
            continue;
        };
        if !id.is_absolute() || !seen.insert(d.descriptor.id.clone()) {
            continue;
        }
        let mut node = ProvNode::new(id.clone(), ProvClass::Dataset).with_attr(
            key("dct:title"),
            Literal::string(d.descriptor.title.clone()),
        );
        if !d.descriptor.version.is_empty() {
            node = node.with_attr(
                key("dcat:version"),
                Literal::string(d.descriptor.version.clone()),
            );
        }
        g.add_node(node)?;
        for s in dag
            .order()
            .iter()
            .filter(|s| dag.predecessors(s).is_empty())
        {
            g.add_edge(ProvEdge::new(
                iris.executions[s].clone(),
                Relation::Used,
                id.clone(),
            ))?;
        }
    }

    let model = iris
        .artifact(&training.model_path, training.model_artifact.sha256_hex())
        .cloned()
        .ok_or_else(|| {
            PassportError::Training(format!(
                "model '{}' is not in the lock",
                training.model_path
            ))
        })?;

    if !training.evaluations.is_empty() {
        let eval = Iri::mint(ws, "evaluation", 1);
        let mut node = ProvNode::new(eval.clone(), ProvClass::ModelEvaluation);
        for e in &training.evaluations {
            let lit = Literal::new(e.value.clone(), crate::provgraph::Datatype::Decimal, None)
                .map_err(|err| PassportError::Training(err.to_string()))?;
            node = node.with_attr(metric_key(&e.metric_name), lit);
        }
        g.add_node(node)?;
        g.add_edge(ProvEdge::new(eval.clone(), Relation::Used, model.clone()))?;
        if let Some(agent) = &iris.agent {
            g.add_edge(ProvEdge::new(
                eval.clone(),
                Relation::WasAssociatedWith,
                agent.clone(),
            ))?;
        }
        let mut used = BTreeSet::new();
        for e in &training.evaluations {
            let target = match &e.dataset_ref {
                Some(DatasetRef::Object(o)) => iris
                    .artifacts
                    .iter()
                    .find(|((_, sha), _)| sha == o.sha256_hex())
                    .map(|(_, id)| id.clone()),
                Some(DatasetRef::Iri(i)) => {
                    Iri::new(i.clone()).ok().filter(|i| g.node(i).is_some())
                }
                None => None,
            };
            if let Some(t) = target {
                if used.insert(t.to_string()) {
                    g.add_edge(ProvEdge::new(eval.clone(), Relation::Used, t))?;
                }
            }
        }
    }

    if !manual.owner.trim().is_empty() {
        let owner = Iri::mint(ws, "owner", 1);
        g.add_node(
            ProvNode::new(owner.clone(), ProvClass::Organization)
                .with_attr(key("foaf:name"), Literal::string(manual.owner.trim())),
        )?;
        g.add_edge(ProvEdge::new(model, Relation::WasAttributedTo, owner))?;
    }
    Ok(g)
}
