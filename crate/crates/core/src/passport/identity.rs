use std::collections::BTreeSet;

use serde_json::Value;

use crate::canonical;
use crate::provgraph::vocab::PROV;
use crate::provgraph::ProvClass;

pub const IDENTITY_PREFIX: &str = "aimp:sha256:";

const TOP_EXCLUDED: [&str; 2] = ["identity", "createdAt"];
const DATASET_EXCLUDED: [&str; 1] = ["retrievedAt"];
const STAGE_EXCLUDED: [&str; 5] = ["startedAt", "endedAt", "stdout", "stderr", "status"];

fn remove_keys(v: &mut Value, keys: &[&str]) {
    if let Some(o) = v.as_object_mut() {
        for k in keys {
            o.remove(*k);
        }
    }
}

/// The part of a passport document that the identity is computed over.
pub fn identity_body(document: &Value) -> Value {
    let mut v = document.clone();
    remove_keys(&mut v, &TOP_EXCLUDED);
    if let Some(ds) = v.get_mut("datasets").and_then(Value::as_array_mut) {
        for d in ds {
            remove_keys(d, &DATASET_EXCLUDED);
        }
    }
    if let Some(stages) = v.pointer_mut("/lock/stages").and_then(Value::as_object_mut) {
        for rec in stages.values_mut() {
            remove_keys(rec, &STAGE_EXCLUDED);
        }
    }
    if let Some(g) = v.get_mut("provenance") {
        strip_graph(g);
    }
    v
}

fn strip_graph(g: &mut Value) {
    let log_class = ProvClass::LogFile.iri();
    let times = [format!("{PROV}startedAtTime"), format!("{PROV}endedAtTime")];
    let mut logs = BTreeSet::new();
    if let Some(nodes) = g.get_mut("nodes").and_then(Value::as_array_mut) {
        nodes.retain(|n| {
            let is_log = n.get("class").and_then(Value::as_str) == Some(log_class.as_str());
            if is_log {
                if let Some(id) = n.get("id").and_then(Value::as_str) {
                    logs.insert(id.to_string());
                }
            }
            !is_log
        });
        for n in nodes.iter_mut() {
            if let Some(attrs) = n.get_mut("attributes").and_then(Value::as_object_mut) {
                for t in &times {
                    attrs.remove(t);
                }
            }
        }
    }
    if let Some(edges) = g.get_mut("edges").and_then(Value::as_array_mut) {
        edges.retain(|e| {
            let touches = |k: &str| {
                e.get(k)
                    .and_then(Value::as_str)
                    .is_some_and(|s| logs.contains(s))
            };
            !touches("subject") && !touches("object")
        });
    }
}

/// `aimp:sha256:<hex>` over the canonical encoding of [`identity_body`].
pub fn identity_of(document: &Value) -> String {
    format!(
        "{IDENTITY_PREFIX}{}",
        canonical::sha256_hex(&identity_body(document))
    )
}

pub fn is_identity(s: &str) -> bool {
    s.strip_prefix(IDENTITY_PREFIX)
        .is_some_and(|h| h.len() == 64 && h.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')))
}
