use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Writes files under the output directory and remembers their names.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(name, &body)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let body = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.text(name, std::str::from_utf8(&body).expect("csv of strings is utf-8"))
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, values: &[T]) -> Result<()> {
        let mut body = Vec::new();
        for v in values {
            serde_json::to_writer(&mut body, v)?;
            body.write_all(b"\n")?;
        }
        self.text(name, std::str::from_utf8(&body).expect("json is utf-8"))
    }

    /// Names and digests of every file written so far, sorted by name.
    pub fn digests(&self) -> Result<Vec<(String, String)>> {
        let mut names = self.written.clone();
        names.sort();
        names.dedup();
        names
            .into_iter()
            .map(|n| {
                let digest = sha256_file(&self.path(&n))?;
                Ok((n, digest))
            })
            .collect()
    }
}
