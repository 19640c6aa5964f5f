use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::ModelPassport;
use crate::cas::hash_file;
use crate::pipeline::hash_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.outcome)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, outcome: Outcome, detail: impl Into<String>) -> Check {
    Check {
        name,
        outcome,
        detail: detail.into(),
    }
}

fn identity_check(p: &ModelPassport) -> Check {
    let computed = p.compute_identity();
    if computed == p.identity {
        check("identity", Outcome::Pass, "")
    } else {
        check(
            "identity",
            Outcome::Fail,
            format!("expected {}, got {computed}", p.identity),
        )
    }
}

fn model_check(p: &ModelPassport, model: Option<&Path>) -> Check {
    let Some(path) = model else {
        return check("model-artifact", Outcome::Skip, "no model file given");
    };
    let expected = p.training.model_artifact.sha256_hex();
    match hash_file(path) {
        Ok(r) if r.sha256_hex() == expected => check("model-artifact", Outcome::Pass, ""),
        Ok(r) => check(
            "model-artifact",
            Outcome::Fail,
            format!("expected {expected}, got {}", r.sha256_hex()),
        ),
        Err(e) => check(
            "model-artifact",
            Outcome::Fail,
            format!("cannot read {}: {e}", path.display()),
        ),
    }
}

fn workspace_check(p: &ModelPassport, workspace: Option<&Path>) -> Check {
    let Some(ws) = workspace else {
        return check("workspace-artifacts", Outcome::Skip, "no workspace given");
    };
    let mut expected = BTreeSet::new();
    for rec in p.lock.stages.values() {
        for (path, r) in rec.deps.iter().chain(rec.outs.iter()) {
            expected.insert((path.clone(), r.sha256_hex().to_string()));
        }
    }
    let (mut ok, mut missing) = (0usize, 0usize);
    let mut failures = Vec::new();
    for (path, sha) in &expected {
        match hash_path(ws, path) {
            Ok(Some(r)) if r.sha256_hex() == sha => ok += 1,
            Ok(Some(r)) => failures.push(format!("{path}: expected {sha}, got {}", r.sha256_hex())),
            Ok(None) => missing += 1,
            Err(e) => failures.push(format!("{path}: {e}")),
        }
    }
    if !failures.is_empty() {
        check("workspace-artifacts", Outcome::Fail, failures.join("; "))
    } else if ok == 0 {
        check(
            "workspace-artifacts",
            Outcome::Skip,
            format!("none of the {missing} recorded files are present"),
        )
    } else if missing > 0 {
        check(
            "workspace-artifacts",
            Outcome::Pass,
            format!("{ok} matched, {missing} absent"),
        )
    } else {
        check(
            "workspace-artifacts",
            Outcome::Pass,
            format!("{ok} matched"),
        )
    }
}

fn provenance_check(p: &ModelPassport) -> Check {
    let report = p.provenance.validate();
    if report.is_valid() {
        check("provenance", Outcome::Pass, "")
    } else {
        check("provenance", Outcome::Fail, report.to_string())
    }
}

/// Run the four checks. Missing inputs give `SKIP`, never `FAIL`.
pub fn verify(
    passport: &ModelPassport,
    workspace: Option<&Path>,
    model: Option<&Path>,
) -> VerificationReport {
    VerificationReport {
        identity: passport.identity.clone(),
        checks: vec![
            identity_check(passport),
            model_check(passport, model),
            workspace_check(passport, workspace),
            provenance_check(passport),
        ],
    }
}
