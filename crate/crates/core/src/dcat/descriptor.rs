use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::turtle::{emit_turtle, RdfLiteral, Term, Triple, TurtleDoc, RDF_TYPE, XSD_INTEGER};
use crate::cas::{Algorithm, Checksum};
use crate::provgraph::{Datatype, Literal};

const DCAT: &str = "http://www.w3.org/ns/dcat#";
const DCT: &str = "http://purl.org/dc/terms/";
const FOAF: &str = "http://xmlns.com/foaf/0.1/";
const SPDX: &str = "http://spdx.org/rdf/terms#";
const OWL_VERSION_INFO: &str = "http://www.w3.org/2002/07/owl#versionInfo";
const XSD_HEX_BINARY: &str = "http://www.w3.org/2001/XMLSchema#hexBinary";
const IANA_MEDIA_TYPES: [&str; 2] = [
    "http://www.iana.org/assignments/media-types/",
    "https://www.iana.org/assignments/media-types/",
];

/// HealthDCAT-AP namespace. Every predicate under it is carried in
/// [`DatasetDescriptor::health_ext`].
pub const HEALTH_NS: &str = "http://healthdataportal.eu/ns/health#";

pub const RECOGNIZED_HEALTH_KEYS: [&str; 7] = [
    "numberOfPatients",
    "numberOfStudies",
    "imagingModalities",
    "sequenceTypes",
    "vendors",
    "clinicalProtocol",
    "useCase",
];

const COUNT_KEYS: [&str; 2] = ["numberOfPatients", "numberOfStudies"];

fn dcat(local: &str) -> String {
    format!("{DCAT}{local}")
}
fn dct(local: &str) -> String {
    format!("{DCT}{local}")
}
fn foaf(local: &str) -> String {
    format!("{FOAF}{local}")
}
fn spdx(local: &str) -> String {
    format!("{SPDX}{local}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("dataset {dataset} is missing mandatory field '{field}'")]
    MissingMandatory { dataset: String, field: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publisher {
    pub name: String,
    /// Agent class local name: `Organization`, `Person` or `Agent`.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Distribution {
    pub access_url: String,
    pub media_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub byte_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<Checksum>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetDescriptor {
    pub id: String,
    pub title: String,
    pub description: String,
    pub version: String,
    pub publisher: Publisher,
    pub license: String,
    pub keywords: Vec<String>,
    /// Extension field (local name under [`HEALTH_NS`]) to its values, sorted.
    pub health_ext: BTreeMap<String, Vec<Literal>>,
    pub distributions: Vec<Distribution>,
}

impl DatasetDescriptor {
    pub fn health_value(&self, key: &str) -> Option<&Literal> {
        self.health_ext.get(key).and_then(|v| v.first())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DescriptorSet {
    pub descriptors: Vec<DatasetDescriptor>,
    pub warnings: Vec<String>,
}

fn label(t: &Term) -> String {
    match t {
        Term::Iri(i) => format!("<{i}>"),
        Term::Blank(b) => format!("_:{b}"),
        Term::Literal(l) => format!("\"{}\"", l.lexical),
    }
}

/// Literal preferred for display: untagged first, then English, then the
/// rest; ties broken lexically.
fn pick_text<'a>(objects: impl Iterator<Item = &'a Term>) -> Option<String> {
    objects
        .filter_map(Term::as_literal)
        .min_by_key(|l| {
            let rank = match l.lang.as_deref() {
                None => 0,
                Some(t) if t.eq_ignore_ascii_case("en") || t.starts_with("en-") => 1,
                Some(_) => 2,
            };
            (rank, l.lexical.clone())
        })
        .map(|l| l.lexical.clone())
}

fn iri_or_lexical(t: &Term) -> Option<String> {
    match t {
        Term::Iri(i) => Some(i.clone()),
        Term::Literal(l) => Some(l.lexical.clone()),
        Term::Blank(_) => None,
    }
}

fn ext_value(t: &Term) -> Option<Literal> {
    match t {
        Term::Literal(l) => {
            Some(Literal::from_rdf(l).unwrap_or_else(|_| Literal::string(l.lexical.clone())))
        }
        Term::Iri(i) => Some(Literal::string(i.clone())),
        Term::Blank(_) => None,
    }
}

/// Build one descriptor per subject typed `dcat:Dataset`.
pub fn descriptor_from_triples(doc: &TurtleDoc) -> Result<DescriptorSet, DescriptorError> {
    let mut set = DescriptorSet::default();
    let known: Vec<String> = [
        RDF_TYPE.to_string(),
        dct("title"),
        dct("description"),
        dcat("version"),
        OWL_VERSION_INFO.to_string(),
        dct("publisher"),
        dct("license"),
        dcat("keyword"),
        dcat("distribution"),
    ]
    .into();

    for subject in doc.subjects_of_type(&dcat("Dataset")) {
        let id = match &subject {
            Term::Iri(i) => i.clone(),
            other => {
                return Err(DescriptorError::MissingMandatory {
                    dataset: label(other),
                    field: "id".into(),
                })
            }
        };
        let missing = |field: &str| DescriptorError::MissingMandatory {
            dataset: id.clone(),
            field: field.into(),
        };

        let title = pick_text(doc.objects(&subject, &dct("title")))
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| missing("title"))?;
        let description = pick_text(doc.objects(&subject, &dct("description"))).unwrap_or_default();
        let version = pick_text(doc.objects(&subject, &dcat("version")))
            .or_else(|| pick_text(doc.objects(&subject, OWL_VERSION_INFO)))
            .unwrap_or_default();

        let mut publishers: Vec<Publisher> = doc
            .objects(&subject, &dct("publisher"))
            .filter_map(|p| publisher(doc, p))
            .collect();
        publishers.sort_by(|a, b| a.name.cmp(&b.name));
        if publishers.len() > 1 {
            set.warnings.push(format!(
                "{id}: {} publishers, keeping '{}'",
                publishers.len(),
                publishers[0].name
            ));
        }
        let publisher = publishers
            .into_iter()
            .next()
            .filter(|p| !p.name.trim().is_empty())
            .ok_or_else(|| missing("publisher"))?;

        let mut licenses: Vec<String> = doc
            .objects(&subject, &dct("license"))
            .filter_map(iri_or_lexical)
            .filter(|l| !l.trim().is_empty())
            .collect();
        licenses.sort();
        let license = licenses
            .into_iter()
            .next()
            .ok_or_else(|| missing("license"))?;

        let mut keywords: Vec<String> = doc
            .objects(&subject, &dcat("keyword"))
            .filter_map(Term::as_literal)
            .map(|l| l.lexical.clone())
            .collect();
        keywords.sort();
        keywords.dedup();

        let mut health_ext: BTreeMap<String, Vec<Literal>> = BTreeMap::new();
        for t in doc.triples.iter().filter(|t| t.subject == subject) {
            if let Some(key) = t.predicate.strip_prefix(HEALTH_NS) {
                match ext_value(&t.object) {
                    Some(v) => health_ext.entry(key.to_string()).or_default().push(v),
                    None => set
                        .warnings
                        .push(format!("{id}: blank node value for {key} ignored")),
                }
            } else if !known.contains(&t.predicate) {
                set.warnings
                    .push(format!("{id}: ignored predicate <{}>", t.predicate));
            }
        }
        for values in health_ext.values_mut() {
            values.sort();
            values.dedup();
        }

        let mut distributions = Vec::new();
        for d in doc.objects(&subject, &dcat("distribution")) {
            distributions.push(distribution(doc, &id, d, &mut set.warnings)?);
        }
        distributions.sort_by(|a, b| a.access_url.cmp(&b.access_url));

        set.descriptors.push(DatasetDescriptor {
            id,
            title,
            description,
            version,
            publisher,
            license,
            keywords,
            health_ext,
            distributions,
        });
    }
    Ok(set)
}

fn publisher(doc: &TurtleDoc, term: &Term) -> Option<Publisher> {
    match term {
        Term::Literal(l) => Some(Publisher {
            name: l.lexical.clone(),
            kind: "Agent".into(),
        }),
        node => {
            let name = pick_text(doc.objects(node, &foaf("name")))
                .or_else(|| node.as_iri().map(str::to_string))?;
            let kind = doc
                .objects(node, RDF_TYPE)
                .filter_map(Term::as_iri)
                .filter_map(|c| c.strip_prefix(FOAF))
                .filter(|c| matches!(*c, "Organization" | "Person" | "Agent"))
                .min()
                .unwrap_or("Agent")
                .to_string();
            Some(Publisher { name, kind })
        }
    }
}

fn distribution(
    doc: &TurtleDoc,
    dataset: &str,
    node: &Term,
    warnings: &mut Vec<String>,
) -> Result<Distribution, DescriptorError> {
    let first = |pred: &str| -> Option<String> {
        let mut v: Vec<String> = doc.objects(node, pred).filter_map(iri_or_lexical).collect();
        v.sort();
        v.into_iter().next()
    };
    let access_url = first(&dcat("accessURL"))
        .or_else(|| first(&dcat("downloadURL")))
        .filter(|u| !u.is_empty())
        .ok_or_else(|| DescriptorError::MissingMandatory {
            dataset: dataset.to_string(),
            field: "distribution.accessURL".into(),
        })?;
    let media_type = first(&dcat("mediaType"))
        .or_else(|| first(&dct("format")))
        .map(|m| {
            IANA_MEDIA_TYPES
                .iter()
                .find_map(|p| m.strip_prefix(p))
                .map(str::to_string)
                .unwrap_or(m)
        })
        .unwrap_or_default();
    let byte_size = match first(&dcat("byteSize")) {
        None => None,
        Some(s) => {
            let parsed = s
                .parse::<u64>()
                .ok()
                .or_else(|| s.strip_suffix(".0").and_then(|x| x.parse().ok()));
            if parsed.is_none() {
                warnings.push(format!("{dataset}: unreadable byteSize '{s}'"));
            }
            parsed
        }
    };
    let mut checksum = None;
    for ck in doc.objects(node, &spdx("checksum")) {
        let alg = doc
            .objects(ck, &spdx("algorithm"))
            .filter_map(Term::as_iri)
            .find_map(|a| match a.strip_prefix(&spdx("checksumAlgorithm_")) {
                Some("md5") => Some(Algorithm::Md5),
                Some("sha256") => Some(Algorithm::Sha256),
                _ => None,
            });
        let value = doc
            .objects(ck, &spdx("checksumValue"))
            .filter_map(Term::as_literal)
            .map(|l| l.lexical.to_ascii_lowercase())
            .next();
        match (alg, value) {
            (Some(a), Some(v)) => match Checksum::new(a, v) {
                Ok(c) => {
                    // sha256 wins over md5 when both are given
                    if checksum
                        .as_ref()
                        .is_none_or(|old: &Checksum| old.algorithm() < c.algorithm())
                    {
                        checksum = Some(c);
                    }
                }
                Err(e) => warnings.push(format!("{dataset}: {e}")),
            },
            _ => warnings.push(format!(
                "{dataset}: unsupported or incomplete spdx:checksum"
            )),
        }
    }
    Ok(Distribution {
        access_url,
        media_type,
        byte_size,
        checksum,
    })
}

fn short_hash(s: &str) -> String {
    hex::encode(&Sha256::digest(s.as_bytes())[..6])
}

/// Inverse of [`descriptor_from_triples`]: the descriptor as DCAT-AP
/// triples. Auxiliary nodes get blank labels derived from the dataset id.
pub fn descriptor_to_triples(d: &DatasetDescriptor) -> Vec<Triple> {
    let s = Term::Iri(d.id.clone());
    let h = short_hash(&d.id);
    let lit = |v: &str| Term::Literal(RdfLiteral::string(v));
    let iri_or_lit = |v: &str| {
        if v.contains("://") && !v.contains(char::is_whitespace) {
            Term::Iri(v.to_string())
        } else {
            lit(v)
        }
    };
    let mut out = vec![
        Triple::new(s.clone(), RDF_TYPE, Term::Iri(dcat("Dataset"))),
        Triple::new(s.clone(), dct("title"), lit(&d.title)),
    ];
    if !d.description.is_empty() {
        out.push(Triple::new(
            s.clone(),
            dct("description"),
            lit(&d.description),
        ));
    }
    if !d.version.is_empty() {
        out.push(Triple::new(s.clone(), dcat("version"), lit(&d.version)));
    }
    let publisher = Term::Blank(format!("p{h}"));
    let kind = match d.publisher.kind.as_str() {
        k @ ("Organization" | "Person" | "Agent") => k,
        _ => "Agent",
    };
    out.push(Triple::new(s.clone(), dct("publisher"), publisher.clone()));
    out.push(Triple::new(
        publisher.clone(),
        RDF_TYPE,
        Term::Iri(foaf(kind)),
    ));
    out.push(Triple::new(publisher, foaf("name"), lit(&d.publisher.name)));
    out.push(Triple::new(
        s.clone(),
        dct("license"),
        iri_or_lit(&d.license),
    ));
    for k in &d.keywords {
        out.push(Triple::new(s.clone(), dcat("keyword"), lit(k)));
    }
    for (key, values) in &d.health_ext {
        for v in values {
            out.push(Triple::new(
                s.clone(),
                format!("{HEALTH_NS}{key}"),
                Term::Literal(v.to_rdf()),
            ));
        }
    }
    for (i, dist) in d.distributions.iter().enumerate() {
        let node = Term::Blank(format!("d{h}n{i}"));
        out.push(Triple::new(s.clone(), dcat("distribution"), node.clone()));
        out.push(Triple::new(
            node.clone(),
            RDF_TYPE,
            Term::Iri(dcat("Distribution")),
        ));
        out.push(Triple::new(
            node.clone(),
            dcat("accessURL"),
            iri_or_lit(&dist.access_url),
        ));
        if !dist.media_type.is_empty() {
            out.push(Triple::new(
                node.clone(),
                dcat("mediaType"),
                lit(&dist.media_type),
            ));
        }
        if let Some(size) = dist.byte_size {
            out.push(Triple::new(
                node.clone(),
                dcat("byteSize"),
                Term::Literal(RdfLiteral::typed(size.to_string(), XSD_INTEGER)),
            ));
        }
        if let Some(ck) = &dist.checksum {
            let c = Term::Blank(format!("c{h}n{i}"));
            out.push(Triple::new(node.clone(), spdx("checksum"), c.clone()));
            out.push(Triple::new(
                c.clone(),
                RDF_TYPE,
                Term::Iri(spdx("Checksum")),
            ));
            out.push(Triple::new(
                c.clone(),
                spdx("algorithm"),
                Term::Iri(spdx(&format!("checksumAlgorithm_{}", ck.algorithm()))),
            ));
            out.push(Triple::new(
                c,
                spdx("checksumValue"),
                Term::Literal(RdfLiteral::typed(ck.hex(), XSD_HEX_BINARY)),
            ));
        }
    }
    out
}

pub fn descriptors_to_turtle(ds: &[DatasetDescriptor]) -> String {
    let mut doc = TurtleDoc::default();
    for (p, ns) in [
        ("dcat", DCAT),
        ("dct", DCT),
        ("foaf", FOAF),
        ("healthdcatap", HEALTH_NS),
        ("spdx", SPDX),
        ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ] {
        doc.prefixes.insert(p.into(), ns.into());
    }
    for d in ds {
        doc.triples.extend(descriptor_to_triples(d));
    }
    emit_turtle(&doc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescriptorViolation {
    Empty(&'static str),
    NonAbsoluteId(String),
    InvalidCount { key: String, value: String },
    EmptyAccessUrl(usize),
}

impl fmt::Display for DescriptorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescriptorViolation::Empty(field) => write!(f, "mandatory field '{field}' is empty"),
            DescriptorViolation::NonAbsoluteId(id) => write!(f, "id '{id}' is not an absolute IRI"),
            DescriptorViolation::InvalidCount { key, value } => {
                write!(f, "{key} must be a non-negative integer, got '{value}'")
            }
            DescriptorViolation::EmptyAccessUrl(i) => {
                write!(f, "distribution {i} has an empty accessURL")
            }
        }
    }
}

pub fn validate_descriptor(d: &DatasetDescriptor) -> Vec<DescriptorViolation> {
    let mut out = Vec::new();
    for (field, value) in [
        ("id", &d.id),
        ("title", &d.title),
        ("publisher", &d.publisher.name),
        ("license", &d.license),
    ] {
        if value.trim().is_empty() {
            out.push(DescriptorViolation::Empty(field));
        }
    }
    if !d.id.trim().is_empty() && (!d.id.contains("://") || d.id.contains(char::is_whitespace)) {
        out.push(DescriptorViolation::NonAbsoluteId(d.id.clone()));
    }
    for key in COUNT_KEYS {
        for v in d.health_ext.get(key).into_iter().flatten() {
            let ok = v.datatype() == Datatype::Integer && !v.lexical().starts_with('-')
                || v.datatype() == Datatype::String && v.lexical().parse::<u64>().is_ok();
            if !ok || v.lexical().trim_start_matches('+').starts_with('-') {
                out.push(DescriptorViolation::InvalidCount {
                    key: key.to_string(),
                    value: v.lexical().to_string(),
                });
            }
        }
    }
    for (i, dist) in d.distributions.iter().enumerate() {
        if dist.access_url.trim().is_empty() {
            out.push(DescriptorViolation::EmptyAccessUrl(i));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcat::turtle::parse_turtle;

    const PREFIXES: &str = "@prefix dcat: <http://www.w3.org/ns/dcat#> .\n\
        @prefix dct: <http://purl.org/dc/terms/> .\n\
        @prefix foaf: <http://xmlns.com/foaf/0.1/> .\n\
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
        @prefix h: <http://healthdataportal.eu/ns/health#> .\n";

    fn parse(body: &str) -> TurtleDoc {
        parse_turtle(&format!("{PREFIXES}{body}")).unwrap()
    }

    #[test]
    fn one_dataset_one_distribution() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ;
               dct:license <http://lic/x> ; dcat:distribution <http://ex/dist> .
               <http://ex/dist> a dcat:Distribution ; dcat:accessURL <http://ex/f.csv> ;
               dcat:mediaType <http://www.iana.org/assignments/media-types/text/csv> ."#,
        );
        let set = descriptor_from_triples(&doc).unwrap();
        assert_eq!(set.descriptors.len(), 1);
        let d = &set.descriptors[0];
        assert_eq!(d.distributions.len(), 1);
        assert_eq!(d.distributions[0].media_type, "text/csv");
        assert_eq!(
            d.publisher,
            Publisher {
                name: "P".into(),
                kind: "Agent".into()
            }
        );
        assert!(validate_descriptor(d).is_empty());
        assert!(set.warnings.is_empty());
    }

    #[test]
    fn cohort_size_is_carried() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ;
               dct:license "L" ; h:numberOfPatients 14300 ; dct:issued "2024" ."#,
        );
        let set = descriptor_from_triples(&doc).unwrap();
        let d = &set.descriptors[0];
        assert_eq!(
            d.health_value("numberOfPatients"),
            Some(&Literal::integer(14300))
        );
        assert_eq!(set.warnings.len(), 1, "dct:issued is reported as ignored");
    }

    #[test]
    fn missing_license() {
        let doc = parse(r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ."#);
        assert_eq!(
            descriptor_from_triples(&doc).unwrap_err(),
            DescriptorError::MissingMandatory {
                dataset: "http://ex/d1".into(),
                field: "license".into()
            }
        );
    }

    #[test]
    fn negative_patient_count_is_a_violation() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ;
               dct:license "L" ; h:numberOfPatients -3 ; h:numberOfStudies "many" ."#,
        );
        let d = &descriptor_from_triples(&doc).unwrap().descriptors[0];
        let v = validate_descriptor(d);
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(
            matches!(&v[0], DescriptorViolation::InvalidCount { key, .. } if key == "numberOfPatients")
        );
    }

    #[test]
    fn blank_fields_are_violations() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ; dct:license "L" ."#,
        );
        let mut d = descriptor_from_triples(&doc).unwrap().descriptors[0].clone();
        d.title = "  ".into();
        d.id = "not-an-iri".into();
        assert_eq!(
            validate_descriptor(&d),
            vec![
                DescriptorViolation::Empty("title"),
                DescriptorViolation::NonAbsoluteId("not-an-iri".into())
            ]
        );
    }

    #[test]
    fn descriptor_triples_round_trip() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T"@en, "Titel"@de ; dct:description "D" ;
               dcat:version "3" ; dct:publisher <http://ex/org> ; dct:license <http://lic/x> ;
               dcat:keyword "b", "a" ; h:vendors "GE", <http://vocab/siemens> ;
               dcat:distribution _:x .
               <http://ex/org> a foaf:Organization ; foaf:name "Org" .
               _:x dcat:accessURL <http://ex/f> ; dcat:byteSize 12 ."#,
        );
        let d = descriptor_from_triples(&doc).unwrap().descriptors;
        assert_eq!(d[0].title, "T");
        assert_eq!(d[0].keywords, vec!["a", "b"]);
        assert_eq!(d[0].publisher.kind, "Organization");
        assert_eq!(d[0].health_ext["vendors"].len(), 2);
        let text = descriptors_to_turtle(&d);
        let again = descriptor_from_triples(&parse_turtle(&text).unwrap()).unwrap();
        assert_eq!(again.descriptors, d);
        assert!(again.warnings.is_empty(), "{:?}", again.warnings);
    }

    #[test]
    fn json_shape_is_camel_case() {
        let doc = parse(
            r#"<http://ex/d1> a dcat:Dataset ; dct:title "T" ; dct:publisher "P" ; dct:license "L" ;
               h:numberOfPatients 5 ; dcat:distribution _:x . _:x dcat:accessURL <http://ex/f> ."#,
        );
        let d = &descriptor_from_triples(&doc).unwrap().descriptors[0];
        let v = serde_json::to_value(d).unwrap();
        assert!(v.get("healthExt").is_some());
        assert!(v["distributions"][0].get("accessUrl").is_some());
        let back: DatasetDescriptor = serde_json::from_value(v).unwrap();
        assert_eq!(&back, d);
    }
}
