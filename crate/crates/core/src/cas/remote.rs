//! Minimal object remote: `HEAD`/`GET`/`PUT /objects/<sha256>` with a bearer
//! token. Every object is checked against its address before it is admitted
//! locally, so an interrupted transfer never leaves a bad object behind.

use std::time::Duration;

use thiserror::Error;
use ureq::Agent;

use super::{CasError, Store};

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("network error: {0}")]
    Network(String),
    #[error("remote rejected credentials (HTTP {0})")]
    Unauthorized(u16),
    #[error("remote returned HTTP {status} for {digest}")]
    HttpStatus { status: u16, digest: String },
    #[error("object {digest} arrived with digest {actual}")]
    DigestMismatch { digest: String, actual: String },
    #[error("empty session token")]
    EmptyToken,
    #[error(transparent)]
    Store(#[from] CasError),
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct TransferReport {
    pub transferred: Vec<String>,
    pub skipped: Vec<String>,
}

pub struct Remote {
    base: String,
    token: String,
    agent: Agent,
}

impl Remote {
    pub fn new(url: &str, token: &str) -> Result<Self, RemoteError> {
        if token.trim().is_empty() {
            return Err(RemoteError::EmptyToken);
        }
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            base: url.trim_end_matches('/').to_string(),
            token: token.to_string(),
            agent,
        })
    }

    fn url(&self, digest: &str) -> String {
        format!("{}/objects/{digest}", self.base)
    }

    fn auth(&self) -> String {
        format!("Bearer {}", self.token)
    }

    fn check(status: u16, digest: &str) -> Result<(), RemoteError> {
        match status {
            200..=299 => Ok(()),
            401 | 403 => Err(RemoteError::Unauthorized(status)),
            _ => Err(RemoteError::HttpStatus {
                status,
                digest: digest.to_string(),
            }),
        }
    }

    pub fn has(&self, digest: &str) -> Result<bool, RemoteError> {
        let resp = self
            .agent
            .head(&self.url(digest))
            .header("Authorization", &self.auth())
            .call()
            .map_err(|e| RemoteError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 404 {
            return Ok(false);
        }
        Self::check(status, digest)?;
        Ok(true)
    }

    pub fn upload(&self, digest: &str, data: &[u8]) -> Result<(), RemoteError> {
        let resp = self
            .agent
            .put(&self.url(digest))
            .header("Authorization", &self.auth())
            .header("Content-Type", "application/octet-stream")
            .send(data)
            .map_err(|e| RemoteError::Network(e.to_string()))?;
        Self::check(resp.status().as_u16(), digest)
    }

    pub fn download(&self, digest: &str) -> Result<Vec<u8>, RemoteError> {
        let mut resp = self
            .agent
            .get(&self.url(digest))
            .header("Authorization", &self.auth())
            .call()
            .map_err(|e| RemoteError::Network(e.to_string()))?;
        Self::check(resp.status().as_u16(), digest)?;
        resp.body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_vec()
            .map_err(|e| RemoteError::Network(e.to_string()))
    }
}

/// Upload every local object the remote does not have yet.
pub fn push(store: &Store, url: &str, token: &str) -> Result<TransferReport, RemoteError> {
    let remote = Remote::new(url, token)?;
    let mut report = TransferReport::default();
    for digest in store.list()? {
        if remote.has(&digest)? {
            report.skipped.push(digest);
            continue;
        }
        // get() re-hashes, so a locally corrupted object is never pushed
        let data = store.get(&digest)?;
        remote.upload(&digest, &data)?;
        report.transferred.push(digest);
    }
    Ok(report)
}

/// Download the named objects that are missing locally.
pub fn pull(
    store: &Store,
    url: &str,
    token: &str,
    digests: &[String],
) -> Result<TransferReport, RemoteError> {
    let remote = Remote::new(url, token)?;
    let mut report = TransferReport::default();
    for digest in digests {
        store.object_path(digest)?;
        if store.contains(digest) {
            report.skipped.push(digest.clone());
            continue;
        }
        let data = remote.download(digest)?;
        match store.put_verified(&data, digest) {
            Ok(_) => report.transferred.push(digest.clone()),
            Err(CasError::CorruptObject { digest, actual }) => {
                return Err(RemoteError::DigestMismatch { digest, actual })
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}
