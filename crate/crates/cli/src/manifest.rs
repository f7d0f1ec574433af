//! Run manifests: the full configuration plus checksums of every input and output.
//!
//! Manifests carry no timestamps or host details, so rerunning a command on
//! unchanged inputs rewrites an identical manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const BUILTIN_TAXONOMY: &str = "<builtin>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<String>, data: &[u8]) -> Self {
        FileDigest {
            path: path.into(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    /// Keyed by input role (`corpus`, `taxonomy`, ...).
    pub inputs: BTreeMap<String, FileDigest>,
    /// Keyed by file name inside the output directory.
    pub outputs: BTreeMap<String, FileDigest>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// Reads an input file and records its checksum under `role`.
    pub fn read_input(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let data = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs
            .insert(role.to_string(), FileDigest::of_bytes(path.display().to_string(), &data));
        Ok(data)
    }

    /// Records the taxonomy source: the configured file or the bundled one.
    pub fn record_taxonomy(&mut self, config: &RunConfig) -> Result<()> {
        match &config.taxonomy {
            Some(p) => {
                self.read_input("taxonomy", p)?;
            }
            None => {
                let src = fieldscope_core::Taxonomy::default_nlp_source();
                self.inputs
                    .insert("taxonomy".into(), FileDigest::of_bytes(BUILTIN_TAXONOMY, src.as_bytes()));
            }
        }
        Ok(())
    }

    /// Writes `data` to `out_dir/name` and records its checksum.
    pub fn write_output(&mut self, out_dir: &Path, name: &str, data: &[u8]) -> Result<PathBuf> {
        let path = out_dir.join(name);
        fs::write(&path, data).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.insert(name.to_string(), FileDigest::of_bytes(name, data));
        Ok(path)
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    /// Writes the manifest next to the outputs it describes.
    pub fn finish(self, out_dir: &Path) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        let path = out_dir.join(Self::file_name(&self.command));
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
