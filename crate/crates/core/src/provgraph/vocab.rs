//! Closed class and relation vocabularies.
//!
//! Anything outside these tables is rejected when a graph is built or loaded.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const AIMP: &str = "https://w3id.org/aimp/";
pub const PROV: &str = "http://www.w3.org/ns/prov#";
pub const MLS: &str = "http://www.w3.org/ns/mls#";
pub const PMLM: &str = "https://w3id.org/pmlm#";
pub const DCAT: &str = "http://www.w3.org/ns/dcat#";
pub const DCT: &str = "http://purl.org/dc/terms/";
pub const SPDX: &str = "http://spdx.org/rdf/terms#";
pub const FOAF: &str = "http://xmlns.com/foaf/0.1/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
/// Attribute keys for stage parameters (`hparam:<dotted.key>`).
pub const HPARAM: &str = "https://w3id.org/aimp/HyperParameterSetting/";

/// The prefix table every graph minted by this crate starts with.
pub fn default_prefixes() -> BTreeMap<String, String> {
    [
        ("aimp", AIMP),
        ("dcat", DCAT),
        ("dct", DCT),
        ("foaf", FOAF),
        ("hparam", HPARAM),
        ("mls", MLS),
        ("pmlm", PMLM),
        ("prov", PROV),
        ("spdx", SPDX),
        ("xsd", XSD),
    ]
    .into_iter()
    .map(|(p, ns)| (p.to_string(), ns.to_string()))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    Entity,
    Activity,
    Agent,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Entity => "Entity",
            Base::Activity => "Activity",
            Base::Agent => "Agent",
        })
    }
}

macro_rules! vocabulary {
    ($name:ident { $($variant:ident => ($ns:expr, $local:literal)),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn namespace(self) -> &'static str {
                match self { $($name::$variant => $ns),+ }
            }

            pub fn local_name(self) -> &'static str {
                match self { $($name::$variant => $local),+ }
            }

            pub fn iri(self) -> String {
                format!("{}{}", self.namespace(), self.local_name())
            }

            pub fn from_iri(iri: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| {
                    iri.strip_prefix(v.namespace()) == Some(v.local_name())
                })
            }

            /// Lookup by local name, e.g. `"PatientRecord"`.
            pub fn from_local_name(name: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.local_name() == name)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.local_name())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.iri())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let iri = String::deserialize(d)?;
                Self::from_iri(&iri).ok_or_else(|| {
                    serde::de::Error::custom(format!("unknown {} {iri}", stringify!($name)))
                })
            }
        }
    };
}

vocabulary!(ProvClass {
    PatientRecord => (AIMP, "PatientRecord"),
    ClinicalAttributeValue => (AIMP, "ClinicalAttributeValue"),
    ImagingAttributeValue => (AIMP, "ImagingAttributeValue"),
    ImageStudy => (AIMP, "ImageStudy"),
    ImageSeries => (AIMP, "ImageSeries"),
    Dataset => (DCAT, "Dataset"),
    Distribution => (DCAT, "Distribution"),
    Script => (AIMP, "Script"),
    ParameterSet => (AIMP, "ParameterSet"),
    Model => (MLS, "Model"),
    SegmentationMask => (AIMP, "SegmentationMask"),
    LogFile => (AIMP, "LogFile"),
    DataFile => (AIMP, "DataFile"),
    Study => (MLS, "Study"),
    Experiment => (MLS, "Experiment"),
    Pipeline => (AIMP, "Pipeline"),
    Stage => (AIMP, "Stage"),
    DataCollection => (AIMP, "DataCollection"),
    Anonymization => (AIMP, "Anonymization"),
    DataUpload => (AIMP, "DataUpload"),
    DataCuration => (AIMP, "DataCuration"),
    StageExecution => (AIMP, "StageExecution"),
    ModelEvaluation => (MLS, "ModelEvaluation"),
    Person => (PROV, "Person"),
    Organization => (PROV, "Organization"),
    SoftwareAgent => (PROV, "SoftwareAgent"),
});

impl ProvClass {
    pub fn base(self) -> Base {
        use ProvClass::*;
        match self {
            DataCollection | Anonymization | DataUpload | DataCuration | StageExecution
            | ModelEvaluation => Base::Activity,
            Person | Organization | SoftwareAgent => Base::Agent,
            _ => Base::Entity,
        }
    }
}

vocabulary!(Relation {
    Used => (PROV, "used"),
    WasGeneratedBy => (PROV, "wasGeneratedBy"),
    WasAssociatedWith => (PROV, "wasAssociatedWith"),
    WasPerformedBy => (PROV, "wasPerformedBy"),
    WasAttributedTo => (PROV, "wasAttributedTo"),
    WasDerivedFrom => (PROV, "wasDerivedFrom"),
    WasRevisionOf => (PROV, "wasRevisionOf"),
    WasInvalidatedBy => (PROV, "wasInvalidatedBy"),
    HasInput => (MLS, "hasInput"),
    HasOutput => (MLS, "hasOutput"),
    HasClinicalAttributeValue => (AIMP, "hasClinicalAttributeValue"),
    HasImageAttributeValue => (AIMP, "hasImageAttributeValue"),
    IsPartOf => (DCT, "isPartOf"),
});

impl Relation {
    /// The single (subject base, object base) pair the relation admits.
    pub fn signature(self) -> (Base, Base) {
        use Base::*;
        use Relation::*;
        match self {
            Used | HasInput | HasOutput => (Activity, Entity),
            WasGeneratedBy | WasInvalidatedBy => (Entity, Activity),
            WasAssociatedWith | WasPerformedBy => (Activity, Agent),
            WasAttributedTo => (Entity, Agent),
            WasDerivedFrom
            | WasRevisionOf
            | HasClinicalAttributeValue
            | HasImageAttributeValue
            | IsPartOf => (Entity, Entity),
        }
    }
}
