//! Content-addressed artifact store.
//!
//! Objects live at `<root>/objects/sha256/<2 hex>/<62 hex>` and every object
//! is recorded with both an md5 and a sha256 digest. sha256 is the address;
//! md5 is kept for `spdx:checksumValue` compatibility only.
//!
//! Writes go to a temporary file in the destination directory and are
//! renamed into place, so concurrent writers of the same content (threads or
//! processes) always leave a complete object behind.

pub mod remote;

use std::fmt;
use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use md5::Md5;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const CHUNK: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum CasError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("object {0} not found")]
    NotFound(String),
    #[error("object {digest} is corrupt (content hashes to {actual})")]
    CorruptObject { digest: String, actual: String },
    #[error("invalid digest '{0}'")]
    InvalidDigest(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CasError + '_ {
    move |source| CasError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Md5,
    Sha256,
}

impl Algorithm {
    pub fn hex_len(self) -> usize {
        match self {
            Algorithm::Md5 => 32,
            Algorithm::Sha256 => 64,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Md5 => "md5",
            Algorithm::Sha256 => "sha256",
        })
    }
}

/// A lowercase hex digest tagged with its algorithm.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawChecksum")]
pub struct Checksum {
    algorithm: Algorithm,
    digest: String,
}

#[derive(Deserialize)]
struct RawChecksum {
    algorithm: Algorithm,
    digest: String,
}

impl TryFrom<RawChecksum> for Checksum {
    type Error = CasError;
    fn try_from(r: RawChecksum) -> Result<Self, CasError> {
        Checksum::new(r.algorithm, r.digest)
    }
}

impl Checksum {
    pub fn new(algorithm: Algorithm, digest: impl Into<String>) -> Result<Self, CasError> {
        let digest = digest.into();
        let ok = digest.len() == algorithm.hex_len()
            && digest
                .bytes()
                .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !ok {
            return Err(CasError::InvalidDigest(digest));
        }
        Ok(Self { algorithm, digest })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn hex(&self) -> &str {
        &self.digest
    }
}

impl fmt::Display for Checksum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.algorithm, self.digest)
    }
}

/// Content address of a byte sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawObjectRef", into = "RawObjectRef")]
pub struct ObjectRef {
    pub md5: Checksum,
    pub sha256: Checksum,
    pub size: u64,
    pub media_type: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawObjectRef {
    md5: String,
    sha256: String,
    size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    media_type: Option<String>,
}

impl TryFrom<RawObjectRef> for ObjectRef {
    type Error = CasError;
    fn try_from(r: RawObjectRef) -> Result<Self, CasError> {
        Ok(ObjectRef {
            md5: Checksum::new(Algorithm::Md5, r.md5)?,
            sha256: Checksum::new(Algorithm::Sha256, r.sha256)?,
            size: r.size,
            media_type: r.media_type,
        })
    }
}

impl From<ObjectRef> for RawObjectRef {
    fn from(o: ObjectRef) -> Self {
        RawObjectRef {
            md5: o.md5.digest,
            sha256: o.sha256.digest,
            size: o.size,
            media_type: o.media_type,
        }
    }
}

impl ObjectRef {
    pub fn sha256_hex(&self) -> &str {
        self.sha256.hex()
    }

    pub fn md5_hex(&self) -> &str {
        self.md5.hex()
    }

    pub fn with_media_type(mut self, media_type: impl Into<String>) -> Self {
        self.media_type = Some(media_type.into());
        self
    }
}

/// Incremental dual hasher.
#[derive(Default, Clone)]
pub struct Hasher {
    md5: Md5,
    sha256: Sha256,
    size: u64,
}

impl Hasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, data: &[u8]) {
        self.md5.update(data);
        self.sha256.update(data);
        self.size += data.len() as u64;
    }

    pub fn finish(self) -> ObjectRef {
        ObjectRef {
            md5: Checksum {
                algorithm: Algorithm::Md5,
                digest: hex::encode(self.md5.finalize()),
            },
            sha256: Checksum {
                algorithm: Algorithm::Sha256,
                digest: hex::encode(self.sha256.finalize()),
            },
            size: self.size,
            media_type: None,
        }
    }
}

pub fn hash_bytes(data: &[u8]) -> ObjectRef {
    let mut h = Hasher::new();
    h.update(data);
    h.finish()
}

pub fn hash_reader<R: Read>(mut reader: R) -> io::Result<ObjectRef> {
    let mut h = Hasher::new();
    let mut buf = vec![0u8; CHUNK];
    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        h.update(&buf[..n]);
    }
    Ok(h.finish())
}

/// Streams the file through a fixed-size buffer.
pub fn hash_file(path: impl AsRef<Path>) -> Result<ObjectRef, CasError> {
    let path = path.as_ref();
    let meta = fs::metadata(path).map_err(io_err(path))?;
    if !meta.is_file() {
        return Err(CasError::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::InvalidInput, "not a regular file"),
        });
    }
    let f = File::open(path).map_err(io_err(path))?;
    hash_reader(f).map_err(io_err(path))
}

fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptObject {
    pub digest: String,
    pub actual: String,
}

/// Store handle. Cheap to clone; safe to share between threads.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// `root` is the store directory (normally `<workspace>/.aimp`).
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn objects_dir(&self) -> PathBuf {
        self.root.join("objects").join("sha256")
    }

    pub fn object_path(&self, sha256: &str) -> Result<PathBuf, CasError> {
        Checksum::new(Algorithm::Sha256, sha256)?;
        Ok(self.objects_dir().join(&sha256[..2]).join(&sha256[2..]))
    }

    pub fn contains(&self, sha256: &str) -> bool {
        self.object_path(sha256)
            .map(|p| p.is_file())
            .unwrap_or(false)
    }

    pub fn put_bytes(&self, data: &[u8]) -> Result<ObjectRef, CasError> {
        let r = hash_bytes(data);
        self.write_object(r.sha256_hex(), |f| f.write_all(data))?;
        Ok(r)
    }

    /// Copy a file into the store. The copy is hashed while it is written,
    /// so the returned reference always describes the stored bytes.
    pub fn put_file(&self, path: impl AsRef<Path>) -> Result<ObjectRef, CasError> {
        let path = path.as_ref();
        let staging = self.root.join("tmp");
        fs::create_dir_all(&staging).map_err(io_err(&staging))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&staging).map_err(io_err(&staging))?;
        let mut src = File::open(path).map_err(io_err(path))?;
        let mut h = Hasher::new();
        let mut buf = vec![0u8; CHUNK];
        loop {
            let n = src.read(&mut buf).map_err(io_err(path))?;
            if n == 0 {
                break;
            }
            h.update(&buf[..n]);
            tmp.write_all(&buf[..n]).map_err(io_err(tmp.path()))?;
        }
        let r = h.finish();
        let dest = self.object_path(r.sha256_hex())?;
        if dest.is_file() {
            return Ok(r);
        }
        let dir = dest.parent().expect("sharded path");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        tmp.as_file().sync_all().map_err(io_err(&dest))?;
        tmp.persist(&dest).map_err(|e| CasError::Io {
            path: dest.clone(),
            source: e.error,
        })?;
        Ok(r)
    }

    /// Admit bytes that claim to have the given sha256. Nothing is written
    /// when the content does not match.
    pub fn put_verified(&self, data: &[u8], sha256: &str) -> Result<ObjectRef, CasError> {
        let r = hash_bytes(data);
        if r.sha256_hex() != sha256 {
            return Err(CasError::CorruptObject {
                digest: sha256.to_string(),
                actual: r.sha256_hex().to_string(),
            });
        }
        self.write_object(sha256, |f| f.write_all(data))?;
        Ok(r)
    }

    fn write_object(
        &self,
        sha256: &str,
        write: impl FnOnce(&mut File) -> io::Result<()>,
    ) -> Result<(), CasError> {
        let dest = self.object_path(sha256)?;
        if dest.is_file() {
            return Ok(());
        }
        let dir = dest.parent().expect("sharded path");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
        write(tmp.as_file_mut()).map_err(io_err(&dest))?;
        tmp.as_file().sync_all().map_err(io_err(&dest))?;
        // rename over an identical object written concurrently is harmless
        tmp.persist(&dest).map_err(|e| CasError::Io {
            path: dest.clone(),
            source: e.error,
        })?;
        Ok(())
    }

    pub fn get(&self, sha256: &str) -> Result<Vec<u8>, CasError> {
        let path = self.object_path(sha256)?;
        let data = match fs::read(&path) {
            Ok(d) => d,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(CasError::NotFound(sha256.to_string()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let actual = sha256_hex(&data);
        if actual != sha256 {
            return Err(CasError::CorruptObject {
                digest: sha256.to_string(),
                actual,
            });
        }
        Ok(data)
    }

    /// All object digests, sorted.
    pub fn list(&self) -> Result<Vec<String>, CasError> {
        let dir = self.objects_dir();
        let mut out = Vec::new();
        let shards = match fs::read_dir(&dir) {
            Ok(s) => s,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(io_err(&dir)(e)),
        };
        for shard in shards {
            let shard = shard.map_err(io_err(&dir))?;
            let prefix = shard.file_name().to_string_lossy().into_owned();
            if prefix.len() != 2 || !shard.path().is_dir() {
                continue;
            }
            for entry in fs::read_dir(shard.path()).map_err(io_err(&shard.path()))? {
                let entry = entry.map_err(io_err(&shard.path()))?;
                let rest = entry.file_name().to_string_lossy().into_owned();
                let digest = format!("{prefix}{rest}");
                if Checksum::new(Algorithm::Sha256, digest.clone()).is_ok() {
                    out.push(digest);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Re-hash every object and report the ones whose content no longer
    /// matches their address.
    pub fn verify(&self) -> Result<Vec<CorruptObject>, CasError> {
        let mut bad = Vec::new();
        for digest in self.list()? {
            let path = self.object_path(&digest)?;
            let f = File::open(&path).map_err(io_err(&path))?;
            let actual = hash_reader(f).map_err(io_err(&path))?;
            if actual.sha256_hex() != digest {
                bad.push(CorruptObject {
                    digest,
                    actual: actual.sha256_hex().to_string(),
                });
            }
        }
        Ok(bad)
    }
}
