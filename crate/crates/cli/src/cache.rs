//! Content-addressed store of rendered output documents.
//!
//! The key is the SHA-256 of the canonical JSON of everything that can change
//! the output: library version, command and flags, seed, tolerances and output
//! format. Each entry records the digest of its body, so a truncated or edited
//! file is detected, reported and replaced.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever the entry layout changes.
const ENTRY_FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Entry {
    format: u32,
    key: String,
    sha256: String,
    body: String,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `serde_json::Value` keeps object keys sorted, so its compact rendering is canonical.
pub fn key(material: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(&serde_json::json!({
        "entry_format": ENTRY_FORMAT,
        "material": material,
    }))
    .expect("JSON values always serialize");
    hex_digest(canonical.as_bytes())
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Body stored under `key`, or `None` on a miss. Unreadable or
    /// inconsistent entries are reported on stderr and treated as misses.
    pub fn lookup(&self, key: &str) -> Option<String> {
        let path = self.path(key);
        let raw = match fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                warn_corrupt(&path, &e.to_string());
                return None;
            }
        };
        match check_entry(&raw, key) {
            Ok(body) => Some(body),
            Err(reason) => {
                warn_corrupt(&path, &reason);
                None
            }
        }
    }

    /// Writes atomically through a temporary file in the same directory.
    pub fn store(&self, key: &str, body: &str) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            format: ENTRY_FORMAT,
            key: key.to_string(),
            sha256: hex_digest(body.as_bytes()),
            body: body.to_string(),
        };
        let path = self.path(key);
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&serde_json::to_vec(&entry)?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

fn check_entry(raw: &[u8], key: &str) -> Result<String, String> {
    let entry: Entry = serde_json::from_slice(raw).map_err(|e| format!("unparsable entry ({e})"))?;
    if entry.format != ENTRY_FORMAT {
        return Err(format!("entry format {} (expected {ENTRY_FORMAT})", entry.format));
    }
    if entry.key != key {
        return Err("entry key does not match its file name".into());
    }
    if hex_digest(entry.body.as_bytes()) != entry.sha256 {
        return Err("body checksum mismatch".into());
    }
    Ok(entry.body)
}

fn warn_corrupt(path: &Path, reason: &str) {
    eprintln!("warning: ignoring corrupt cache entry {}: {reason}; recomputing", path.display());
}

/// `$XDG_CACHE_HOME/spinlab`, falling back to `$HOME/.cache/spinlab`.
pub fn default_dir() -> Option<PathBuf> {
    let nonempty = |v: &str| std::env::var_os(v).filter(|s| !s.is_empty()).map(PathBuf::from);
    nonempty("XDG_CACHE_HOME").or_else(|| nonempty("HOME").map(|h| h.join(".cache"))).map(|d| d.join("spinlab"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_depends_on_every_field() {
        let a = key(&json!({"n": 8, "b": 0.3}));
        assert_eq!(a, key(&json!({"b": 0.3, "n": 8})));
        assert_ne!(a, key(&json!({"n": 8, "b": 0.30000000000000004})));
        assert_ne!(a, key(&json!({"n": 9, "b": 0.3})));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let k = key(&json!({"x": 1}));
        assert_eq!(cache.lookup(&k), None);
        let path = cache.store(&k, "{\"v\":1}\n").unwrap();
        assert_eq!(cache.lookup(&k).as_deref(), Some("{\"v\":1}\n"));

        let tampered = fs::read_to_string(&path).unwrap().replace("\\\"v\\\":1", "\\\"v\\\":2");
        fs::write(&path, tampered).unwrap();
        assert_eq!(cache.lookup(&k), None);

        fs::write(&path, b"not json").unwrap();
        assert_eq!(cache.lookup(&k), None);

        cache.store(&k, "ok").unwrap();
        assert_eq!(cache.lookup(&k).as_deref(), Some("ok"));
    }
}
