use std::fs;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

/// Directory holding cached outputs, named by the `POSETREP_CACHE_DIR`
/// environment variable.
pub const CACHE_ENV: &str = "POSETREP_CACHE_DIR";

pub struct Cache {
    dir: PathBuf,
}

/// A cached command result: the exit code and the exact output text.
pub struct Entry {
    pub code: u8,
    pub output: String,
}

impl Cache {
    pub fn from_env() -> Option<Cache> {
        std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(|d| Cache { dir: d.into() })
    }

    /// Content hash of the canonical command description and engine version.
    pub fn key(command: &str) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(command.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn get(&self, key: &str) -> Option<Entry> {
        let text = fs::read_to_string(self.dir.join(format!("{key}.out"))).ok()?;
        let code = fs::read_to_string(self.dir.join(format!("{key}.code"))).ok()?.trim().parse().ok()?;
        Some(Entry { code, output: text })
    }

    pub fn put(&self, key: &str, entry: &Entry) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        // the code file is written last, so a partial entry is never read
        fs::write(self.dir.join(format!("{key}.out")), &entry.output)?;
        fs::write(self.dir.join(format!("{key}.code")), entry.code.to_string())
    }
}
