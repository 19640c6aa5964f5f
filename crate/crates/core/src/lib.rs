//! Core library for `aimp`: checksummed pipeline execution, lifecycle
//! provenance and verifiable AI model passports.
//!
//! | module | role |
//! |---|---|
//! | [`provgraph`] | typed PROV/MLS provenance graph with Turtle and canonical JSON output |
//! | [`cas`] | content-addressed artifact store (md5 + sha256) with an HTTP remote |
//! | [`dcat`] | DCAT-AP dataset descriptors, Turtle subset, FAIR Data Point harvesting |
//! | [`pipeline`] | stage DAG, fingerprints, cached execution, lock file |
//! | [`passport`] | passport assembly, identity derivation and verification |
//! | [`report`] | static HTML / Markdown rendering of a passport |

pub mod canonical;
pub mod cas;
pub mod dcat;
pub mod passport;
pub mod pipeline;
pub mod provgraph;
pub mod report;

/// Version string recorded in passports.
pub const TOOL_VERSION: &str = concat!("aimp/", env!("CARGO_PKG_VERSION"));
