//! Typed provenance graph.
//!
//! Nodes are entities, activities or agents drawn from a closed class
//! vocabulary; edges are binary PROV/MLS relations with a fixed
//! domain/range. The graph serializes to deterministic Turtle and to
//! canonical JSON, the latter being what passport identities hash.

mod serialize;
mod term;
pub mod vocab;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use term::{Datatype, Iri, Literal, TermError};
pub use vocab::{Base, ProvClass, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateId(Iri),
    #[error("unknown node {0}")]
    UnknownNode(Iri),
    #[error("{predicate} expects {expected} but got {actual}")]
    RelationDomainViolation {
        predicate: Relation,
        expected: Base,
        actual: Base,
    },
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("prefix '{prefix}' bound to both <{left}> and <{right}>")]
    PrefixConflict {
        prefix: String,
        left: String,
        right: String,
    },
    #[error("node {0} has different classes in the merged graphs")]
    ClassConflict(Iri),
    #[error("conflicting values for attribute {key} on {id}")]
    AttributeConflict { id: Iri, key: Iri },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("graph is invalid: {0}")]
    InvalidGraph(ValidationReport),
    #[error("cannot decode graph: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvNode {
    pub id: Iri,
    pub class: ProvClass,
    pub attributes: BTreeMap<Iri, Literal>,
}

impl ProvNode {
    pub fn new(id: Iri, class: ProvClass) -> Self {
        Self {
            id,
            class,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: Iri, value: Literal) -> Self {
        self.attributes.insert(key, value);
        self
    }

    pub fn base(&self) -> Base {
        self.class.base()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProvEdge {
    pub subject: Iri,
    pub predicate: Relation,
    pub object: Iri,
}

impl ProvEdge {
    pub fn new(subject: Iri, predicate: Relation, object: Iri) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    UnknownNode(Iri),
    UnresolvablePrefix(Iri),
    InvalidIri(String),
    DuplicateId(Iri),
    DuplicateEdge(String),
    RelationDomainViolation {
        subject: Iri,
        predicate: Relation,
        object: Iri,
        expected: Base,
        actual: Base,
    },
    InvalidPrefixBinding(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownNode(id) => write!(f, "unknown node {id}"),
            Violation::UnresolvablePrefix(id) => write!(f, "unresolvable prefix in {id}"),
            Violation::InvalidIri(s) => write!(f, "invalid IRI {s}"),
            Violation::DuplicateId(id) => write!(f, "duplicate node id {id}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge {e}"),
            Violation::RelationDomainViolation {
                subject,
                predicate,
                object,
                expected,
                actual,
            } => write!(
                f,
                "({subject} {predicate} {object}): expected {expected}, got {actual}"
            ),
            Violation::InvalidPrefixBinding(p) => {
                write!(f, "prefix '{p}' is not bound to an absolute IRI")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A provenance graph. Nodes and edges are looked up by expanded IRI, so
/// `ex:p1` and its absolute form name the same node.
#[derive(Debug, Clone, Default)]
pub struct ProvGraph {
    prefixes: BTreeMap<String, String>,
    nodes: Vec<ProvNode>,
    edges: Vec<ProvEdge>,
    node_index: HashMap<String, usize>,
    edge_index: HashSet<(String, Relation, String)>,
}

impl PartialEq for ProvGraph {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_value() == other.canonical_value()
    }
}

impl ProvGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty graph carrying the standard prefix table.
    pub fn with_default_prefixes() -> Self {
        Self {
            prefixes: vocab::default_prefixes(),
            ..Self::default()
        }
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn nodes(&self) -> &[ProvNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ProvEdge] {
        &self.edges
    }

    pub fn expand(&self, iri: &Iri) -> Result<String, TermError> {
        iri.expand(&self.prefixes)
    }

    pub fn node(&self, id: &Iri) -> Option<&ProvNode> {
        let key = self.expand(id).ok()?;
        self.node_index.get(&key).map(|&i| &self.nodes[i])
    }

    pub fn nodes_of_class(&self, class: ProvClass) -> impl Iterator<Item = &ProvNode> {
        self.nodes.iter().filter(move |n| n.class == class)
    }

    pub fn add_prefix(
        &mut self,
        prefix: impl Into<String>,
        namespace: impl Into<String>,
    ) -> Result<(), GraphError> {
        let prefix = prefix.into();
        let namespace = namespace.into();
        if !namespace.contains("://") {
            return Err(TermError::InvalidIri(namespace).into());
        }
        match self.prefixes.get(&prefix) {
            Some(existing) if *existing != namespace => Err(GraphError::PrefixConflict {
                prefix,
                left: existing.clone(),
                right: namespace,
            }),
            Some(_) => Ok(()),
            None => {
                self.prefixes.insert(prefix, namespace);
                Ok(())
            }
        }
    }

    pub fn add_node(&mut self, node: ProvNode) -> Result<(), GraphError> {
        let key = self.expand(&node.id)?;
        for k in node.attributes.keys() {
            self.expand(k)?;
        }
        if self.node_index.contains_key(&key) {
            return Err(GraphError::DuplicateId(node.id));
        }
        self.node_index.insert(key, self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: ProvEdge) -> Result<(), GraphError> {
        let s = self.expand(&edge.subject)?;
        let o = self.expand(&edge.object)?;
        let sb = self
            .node_index
            .get(&s)
            .map(|&i| self.nodes[i].base())
            .ok_or_else(|| GraphError::UnknownNode(edge.subject.clone()))?;
        let ob = self
            .node_index
            .get(&o)
            .map(|&i| self.nodes[i].base())
            .ok_or_else(|| GraphError::UnknownNode(edge.object.clone()))?;
        let (domain, range) = edge.predicate.signature();
        if sb != domain {
            return Err(GraphError::RelationDomainViolation {
                predicate: edge.predicate,
                expected: domain,
                actual: sb,
            });
        }
        if ob != range {
            return Err(GraphError::RelationDomainViolation {
                predicate: edge.predicate,
                expected: range,
                actual: ob,
            });
        }
        let key = (s, edge.predicate, o);
        if self.edge_index.contains(&key) {
            return Err(GraphError::DuplicateEdge(format!(
                "({} {} {})",
                edge.subject, edge.predicate, edge.object
            )));
        }
        self.edge_index.insert(key);
        self.edges.push(edge);
        Ok(())
    }

    /// Set or overwrite an attribute on an existing node.
    pub fn set_attribute(&mut self, id: &Iri, key: Iri, value: Literal) -> Result<(), GraphError> {
        self.expand(&key)?;
        let idx = self
            .expand(id)
            .ok()
            .and_then(|k| self.node_index.get(&k).copied())
            .ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        self.nodes[idx].attributes.insert(key, value);
        Ok(())
    }

    /// Reports every problem found; never mutates.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (p, ns) in &self.prefixes {
            if !ns.contains("://") {
                violations.push(Violation::InvalidPrefixBinding(p.clone()));
            }
        }
        let mut bases: HashMap<String, Base> = HashMap::new();
        for n in &self.nodes {
            match self.expand(&n.id) {
                Ok(k) => {
                    if bases.insert(k, n.base()).is_some() {
                        violations.push(Violation::DuplicateId(n.id.clone()));
                    }
                }
                Err(_) => violations.push(Violation::UnresolvablePrefix(n.id.clone())),
            }
            for k in n.attributes.keys() {
                if self.expand(k).is_err() {
                    violations.push(Violation::UnresolvablePrefix(k.clone()));
                }
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            let mut endpoint = |iri: &Iri| -> Option<(String, Base)> {
                match self.expand(iri) {
                    Err(_) => {
                        violations.push(Violation::UnresolvablePrefix(iri.clone()));
                        None
                    }
                    Ok(k) => match bases.get(&k) {
                        Some(b) => Some((k, *b)),
                        None => {
                            violations.push(Violation::UnknownNode(iri.clone()));
                            None
                        }
                    },
                }
            };
            let s = endpoint(&e.subject);
            let o = endpoint(&e.object);
            let (Some((sk, sb)), Some((ok, ob))) = (s, o) else {
                continue;
            };
            let (domain, range) = e.predicate.signature();
            for (expected, actual) in [(domain, sb), (range, ob)] {
                if expected != actual {
                    violations.push(Violation::RelationDomainViolation {
                        subject: e.subject.clone(),
                        predicate: e.predicate,
                        object: e.object.clone(),
                        expected,
                        actual,
                    });
                }
            }
            if !seen.insert((sk, e.predicate, ok)) {
                violations.push(Violation::DuplicateEdge(format!(
                    "({} {} {})",
                    e.subject, e.predicate, e.object
                )));
            }
        }
        ValidationReport { violations }
    }

    fn require_valid(&self) -> Result<(), GraphError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(GraphError::InvalidGraph(report))
        }
    }

    /// Union of two graphs. Nodes are keyed by id and their attribute maps
    /// merged; edges are deduplicated.
    pub fn merge(a: &ProvGraph, b: &ProvGraph) -> Result<ProvGraph, GraphError> {
        let mut out = a.clone();
        for (p, ns) in &b.prefixes {
            out.add_prefix(p.clone(), ns.clone())?;
        }
        for n in &b.nodes {
            let key = b.expand(&n.id)?;
            match out.node_index.get(&key).copied() {
                None => {
                    out.node_index.insert(key, out.nodes.len());
                    out.nodes.push(n.clone());
                }
                Some(i) => {
                    let existing = &out.nodes[i];
                    if existing.class != n.class {
                        return Err(GraphError::ClassConflict(n.id.clone()));
                    }
                    let mut attrs: BTreeMap<String, (Iri, Literal)> = BTreeMap::new();
                    for (k, v) in &existing.attributes {
                        attrs.insert(out.expand(k)?, (k.clone(), v.clone()));
                    }
                    for (k, v) in &n.attributes {
                        let ek = b.expand(k)?;
                        match attrs.get(&ek) {
                            Some((_, old)) if old != v => {
                                return Err(GraphError::AttributeConflict {
                                    id: n.id.clone(),
                                    key: k.clone(),
                                })
                            }
                            Some(_) => {}
                            None => {
                                attrs.insert(ek, (k.clone(), v.clone()));
                            }
                        }
                    }
                    out.nodes[i].attributes = attrs.into_values().collect();
                }
            }
        }
        for e in &b.edges {
            let key = (b.expand(&e.subject)?, e.predicate, b.expand(&e.object)?);
            if out.edge_index.insert(key) {
                out.edges.push(e.clone());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
