use std::collections::BTreeSet;
use std::time::Duration;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use ureq::Agent;

use super::descriptor::{descriptor_from_triples, DatasetDescriptor, DescriptorError};
use super::turtle::{parse_turtle, TurtleDoc, TurtleError};

const DCAT_DATASET: &str = "http://www.w3.org/ns/dcat#dataset";
const DCAT_CATALOG: &str = "http://www.w3.org/ns/dcat#catalog";
const FDP_CATALOG: &str = "https://w3id.org/fdp/fdp-o#metadataCatalog";
const R3D_CATALOG: &str = "http://www.re3data.org/schema/3-0#dataCatalog";
const MAX_BODY: u64 = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("network error fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("HTTP {status} from {url}")]
    HttpStatus { url: String, status: u16 },
    #[error("{url}: {source}")]
    Syntax {
        url: String,
        #[source]
        source: TurtleError,
    },
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}

#[derive(Debug, Clone)]
pub struct HarvestOptions {
    pub timeout: Duration,
    pub retries: u32,
    pub max_redirects: u32,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            retries: 0,
            max_redirects: 5,
        }
    }
}

/// A descriptor together with where and when it was fetched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HarvestedDescriptor {
    pub descriptor: DatasetDescriptor,
    pub source_url: String,
    pub retrieved_at: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestResult {
    pub descriptors: Vec<HarvestedDescriptor>,
    pub warnings: Vec<String>,
}

struct Client {
    agent: Agent,
    retries: u32,
}

impl Client {
    fn new(opts: &HarvestOptions) -> Self {
        let agent = Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .http_status_as_error(false)
            .max_redirects(opts.max_redirects)
            .build()
            .into();
        Self {
            agent,
            retries: opts.retries,
        }
    }

    fn get_once(&self, url: &str) -> Result<String, HarvestError> {
        let net = |e: ureq::Error| HarvestError::Network {
            url: url.to_string(),
            message: e.to_string(),
        };
        let mut resp = self
            .agent
            .get(url)
            .header("Accept", "text/turtle")
            .call()
            .map_err(net)?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(HarvestError::HttpStatus {
                url: url.to_string(),
                status,
            });
        }
        resp.body_mut()
            .with_config()
            .limit(MAX_BODY)
            .read_to_string()
            .map_err(net)
    }

    fn get(&self, url: &str) -> Result<String, HarvestError> {
        let mut attempt = 0;
        loop {
            match self.get_once(url) {
                Err(e) if attempt < self.retries && retryable(&e) => {
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(200 * u64::from(attempt)));
                }
                other => return other,
            }
        }
    }

    fn fetch(&self, url: &str) -> Result<TurtleDoc, HarvestError> {
        let body = self.get(url)?;
        parse_turtle(&body).map_err(|source| HarvestError::Syntax {
            url: url.to_string(),
            source,
        })
    }
}

fn retryable(e: &HarvestError) -> bool {
    match e {
        HarvestError::Network { .. } => true,
        HarvestError::HttpStatus { status, .. } => *status >= 500,
        _ => false,
    }
}

fn linked(doc: &TurtleDoc, predicates: &[&str]) -> BTreeSet<String> {
    doc.triples
        .iter()
        .filter(|t| predicates.contains(&t.predicate.as_str()))
        .filter_map(|t| t.object.as_iri().map(str::to_string))
        .collect()
}

/// Harvest dataset descriptors from an FDP entry point. The entry may be a
/// dataset, a catalog (its `dcat:dataset` links are followed) or an FDP
/// repository record (its catalog links are followed first).
pub fn harvest(url: &str, opts: &HarvestOptions) -> Result<HarvestResult, HarvestError> {
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(HarvestError::Network {
            url: url.to_string(),
            message: "only http and https URLs are supported".into(),
        });
    }
    let client = Client::new(opts);
    let mut result = HarvestResult::default();
    let mut visited = BTreeSet::new();
    let mut seen_ids = BTreeSet::new();
    let mut queue = vec![(url.to_string(), 0u8)];

    while let Some((next, depth)) = queue.pop() {
        if !visited.insert(next.clone()) {
            continue;
        }
        let doc = client.fetch(&next)?;
        let retrieved_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        let set = descriptor_from_triples(&doc)?;
        result.warnings.extend(set.warnings);
        for d in set.descriptors {
            if seen_ids.insert(d.id.clone()) {
                result.descriptors.push(HarvestedDescriptor {
                    descriptor: d,
                    source_url: next.clone(),
                    retrieved_at: retrieved_at.clone(),
                });
            }
        }
        if depth >= 2 {
            continue;
        }
        let mut follow: Vec<String> = linked(
            &doc,
            &[DCAT_DATASET, DCAT_CATALOG, FDP_CATALOG, R3D_CATALOG],
        )
        .into_iter()
        .filter(|l| !doc_has_dataset(&doc, l))
        .collect();
        follow.sort();
        // reverse so the stack pops in lexical order
        for l in follow.into_iter().rev() {
            if l.starts_with("http://") || l.starts_with("https://") {
                queue.push((l, depth + 1));
            }
        }
    }
    result
        .descriptors
        .sort_by(|a, b| a.descriptor.id.cmp(&b.descriptor.id));
    Ok(result)
}

fn doc_has_dataset(doc: &TurtleDoc, iri: &str) -> bool {
    doc.subjects_of_type("http://www.w3.org/ns/dcat#Dataset")
        .iter()
        .any(|s| s.as_iri() == Some(iri))
}
