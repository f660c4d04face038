//! Run manifests: line-oriented `key=value` text written when a run starts
//! and rewritten with checksums when it completes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("manifest line {} has no '='", i + 1))
            })?;
            m.push(k, v);
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// `status=started` snapshot.
    pub fn start(&mut self, dir: &Path) -> Result<PathBuf> {
        self.push("status", "started");
        let path = dir.join(MANIFEST_FILE);
        self.write(&path)?;
        Ok(path)
    }

    /// Replaces the status, appends duration and per-file checksums.
    pub fn finalize(
        &mut self,
        dir: &Path,
        files: &[PathBuf],
        elapsed: Duration,
    ) -> Result<PathBuf> {
        self.entries.retain(|(k, _)| k != "status");
        self.push("status", "complete");
        self.push("duration_s", format!("{:.3}", elapsed.as_secs_f64()));
        for f in files {
            let name = f
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            self.push(format!("file.{name}.sha256"), sha256_file(f)?);
        }
        let path = dir.join(MANIFEST_FILE);
        self.write(&path)?;
        Ok(path)
    }

    /// `(file name, checksum)` pairs recorded by `finalize`.
    pub fn checksums(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("file.")
                    .and_then(|r| r.strip_suffix(".sha256"))
                    .map(|n| (n.to_string(), v.clone()))
            })
            .collect()
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle_and_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.csv");
        fs::write(&f, b"abc").unwrap();
        let mut m = RunManifest::new();
        m.push("experiment", "fig3_cdf");
        m.start(dir.path()).unwrap();
        assert_eq!(
            RunManifest::read(&dir.path().join(MANIFEST_FILE))
                .unwrap()
                .get("status"),
            Some("started")
        );
        m.finalize(dir.path(), &[f], Duration::from_millis(1500))
            .unwrap();
        let back = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back.get("status"), Some("complete"));
        assert_eq!(back.get("duration_s"), Some("1.500"));
        // sha256("abc")
        assert_eq!(
            back.checksums(),
            vec![(
                "a.csv".to_string(),
                "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad".to_string()
            )]
        );
        assert!(RunManifest::parse("novalue").is_err());
    }
}
