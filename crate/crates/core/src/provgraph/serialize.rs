use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{GraphError, Iri, Literal, ProvClass, ProvEdge, ProvGraph, ProvNode, Relation};
use crate::canonical;
use crate::dcat::turtle::{self, Term, Triple, TurtleDoc, RDF_TYPE};

impl ProvGraph {
    /// JSON form with every IRI expanded and nodes/edges sorted. Does not
    /// check validity; unresolvable names are left as written.
    pub fn canonical_value(&self) -> Value {
        let exp = |i: &Iri| self.expand(i).unwrap_or_else(|_| i.to_string());
        let mut nodes: Vec<(String, Value)> = self
            .nodes
            .iter()
            .map(|n| {
                let attrs: Map<String, Value> = n
                    .attributes
                    .iter()
                    .map(|(k, v)| (exp(k), serde_json::to_value(v).expect("literal")))
                    .collect();
                let id = exp(&n.id);
                let v = json!({
                    "id": id,
                    "kind": n.base().to_string(),
                    "class": n.class.iri(),
                    "attributes": attrs,
                });
                (id, v)
            })
            .collect();
        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        let mut edges: Vec<(String, String, String)> = self
            .edges
            .iter()
            .map(|e| (exp(&e.subject), e.predicate.iri(), exp(&e.object)))
            .collect();
        edges.sort();
        edges.dedup();
        json!({
            "prefixes": self.prefixes,
            "nodes": nodes.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
            "edges": edges
                .into_iter()
                .map(|(s, p, o)| json!({"subject": s, "predicate": p, "object": o}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn to_canonical_json(&self) -> Result<Vec<u8>, GraphError> {
        self.require_valid()?;
        Ok(canonical::to_vec(&self.canonical_value()))
    }

    /// Decode the canonical JSON form. Structural problems (duplicate ids,
    /// dangling edges) are kept so that [`ProvGraph::validate`] can report
    /// them; unknown classes or relations are rejected outright.
    pub fn from_json_value(value: &Value) -> Result<ProvGraph, GraphError> {
        #[derive(Deserialize)]
        struct RawNode {
            id: String,
            class: String,
            #[serde(default)]
            attributes: BTreeMap<String, Literal>,
        }
        #[derive(Deserialize)]
        struct RawEdge {
            subject: String,
            predicate: String,
            object: String,
        }
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            prefixes: BTreeMap<String, String>,
            #[serde(default)]
            nodes: Vec<RawNode>,
            #[serde(default)]
            edges: Vec<RawEdge>,
        }
        let raw: Raw =
            serde_json::from_value(value.clone()).map_err(|e| GraphError::Decode(e.to_string()))?;
        let iri = |s: String| Iri::new(s).map_err(GraphError::from);
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for n in raw.nodes {
            let class = ProvClass::from_iri(&n.class)
                .ok_or_else(|| GraphError::Decode(format!("unknown class <{}>", n.class)))?;
            let mut attributes = BTreeMap::new();
            for (k, v) in n.attributes {
                attributes.insert(iri(k)?, v);
            }
            nodes.push(ProvNode {
                id: iri(n.id)?,
                class,
                attributes,
            });
        }
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in raw.edges {
            let predicate = Relation::from_iri(&e.predicate)
                .ok_or_else(|| GraphError::Decode(format!("unknown relation <{}>", e.predicate)))?;
            edges.push(ProvEdge::new(iri(e.subject)?, predicate, iri(e.object)?));
        }
        Ok(Self::from_parts(raw.prefixes, nodes, edges))
    }

    pub fn from_canonical_json(bytes: &[u8]) -> Result<ProvGraph, GraphError> {
        let v: Value =
            serde_json::from_slice(bytes).map_err(|e| GraphError::Decode(e.to_string()))?;
        Self::from_json_value(&v)
    }

    /// Assemble without checks; first occurrence wins in the lookup indexes.
    pub(crate) fn from_parts(
        prefixes: BTreeMap<String, String>,
        nodes: Vec<ProvNode>,
        edges: Vec<ProvEdge>,
    ) -> ProvGraph {
        let mut g = ProvGraph {
            prefixes,
            ..ProvGraph::default()
        };
        for (i, n) in nodes.iter().enumerate() {
            if let Ok(k) = n.id.expand(&g.prefixes) {
                g.node_index.entry(k).or_insert(i);
            }
        }
        for e in &edges {
            if let (Ok(s), Ok(o)) = (g.expand(&e.subject), g.expand(&e.object)) {
                g.edge_index.insert((s, e.predicate, o));
            }
        }
        g.nodes = nodes;
        g.edges = edges;
        g
    }

    /// The graph as RDF triples (types, literal attributes, relations).
    pub fn to_turtle_doc(&self) -> TurtleDoc {
        let exp = |i: &Iri| self.expand(i).unwrap_or_else(|_| i.to_string());
        let mut triples = BTreeSet::new();
        for n in &self.nodes {
            let s = Term::Iri(exp(&n.id));
            triples.insert(Triple::new(s.clone(), RDF_TYPE, Term::Iri(n.class.iri())));
            for (k, v) in &n.attributes {
                triples.insert(Triple::new(s.clone(), exp(k), Term::Literal(v.to_rdf())));
            }
        }
        for e in &self.edges {
            triples.insert(Triple::new(
                Term::Iri(exp(&e.subject)),
                e.predicate.iri(),
                Term::Iri(exp(&e.object)),
            ));
        }
        TurtleDoc {
            prefixes: self.prefixes.clone(),
            triples: triples.into_iter().collect(),
        }
    }

    pub fn to_turtle(&self) -> Result<String, GraphError> {
        self.require_valid()?;
        Ok(turtle::emit_turtle(&self.to_turtle_doc()))
    }

    /// Read a graph back from triples: every subject needs exactly one
    /// `rdf:type` from the class vocabulary, literal objects become
    /// attributes and IRI objects must use a registered relation.
    pub fn from_turtle_doc(doc: &TurtleDoc) -> Result<ProvGraph, GraphError> {
        let mut g = ProvGraph::new();
        for (p, ns) in &doc.prefixes {
            g.add_prefix(p.clone(), ns.clone())?;
        }
        let subject_iri = |t: &Term| -> Result<Iri, GraphError> {
            match t {
                Term::Iri(s) => Ok(Iri::new(s.clone())?),
                Term::Blank(b) => Err(GraphError::Decode(format!(
                    "blank node _:{b} is not supported in provenance graphs"
                ))),
                Term::Literal(l) => Err(GraphError::Decode(format!(
                    "literal \"{}\" in subject position",
                    l.lexical
                ))),
            }
        };

        let mut classes: BTreeMap<String, ProvClass> = BTreeMap::new();
        for t in doc.triples.iter().filter(|t| t.predicate == RDF_TYPE) {
            let id = subject_iri(&t.subject)?;
            let class_iri = t
                .object
                .as_iri()
                .ok_or_else(|| GraphError::Decode(format!("rdf:type of {id} is not an IRI")))?;
            let class = ProvClass::from_iri(class_iri)
                .ok_or_else(|| GraphError::Decode(format!("unknown class <{class_iri}>")))?;
            if let Some(prev) = classes.insert(id.to_string(), class) {
                if prev != class {
                    return Err(GraphError::Decode(format!("{id} has more than one class")));
                }
            }
        }
        for (id, class) in &classes {
            g.add_node(ProvNode::new(Iri::new(id.clone())?, *class))?;
        }

        let mut edges = Vec::new();
        for t in doc.triples.iter().filter(|t| t.predicate != RDF_TYPE) {
            let id = subject_iri(&t.subject)?;
            if !classes.contains_key(id.as_str()) {
                return Err(GraphError::Decode(format!("{id} has no rdf:type")));
            }
            match &t.object {
                Term::Literal(l) => {
                    let value = Literal::from_rdf(l)?;
                    let key = Iri::new(t.predicate.clone())?;
                    let node = g.node(&id).expect("typed subject");
                    if let Some(existing) = node.attributes.get(&key) {
                        if *existing != value {
                            return Err(GraphError::AttributeConflict { id, key });
                        }
                    }
                    g.set_attribute(&id, key, value)?;
                }
                Term::Iri(o) => {
                    let rel = Relation::from_iri(&t.predicate).ok_or_else(|| {
                        GraphError::Decode(format!("unknown relation <{}>", t.predicate))
                    })?;
                    edges.push(ProvEdge::new(id, rel, Iri::new(o.clone())?));
                }
                Term::Blank(b) => {
                    return Err(GraphError::Decode(format!(
                        "blank node _:{b} is not supported in provenance graphs"
                    )))
                }
            }
        }
        for e in edges {
            match g.add_edge(e) {
                Ok(()) | Err(GraphError::DuplicateEdge(_)) => {}
                Err(err) => return Err(err),
            }
        }
        Ok(g)
    }
}
