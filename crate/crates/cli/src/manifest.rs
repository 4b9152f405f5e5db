use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// Provenance record written next to every stage's outputs. Contains no
/// timestamps or absolute paths of its own, so reruns with identical inputs
/// produce identical manifests.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    config: &'a BTreeMap<String, Value>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects what a stage read, wrote and was configured with.
#[derive(Debug, Default)]
pub struct Recorder {
    seed: Option<u64>,
    config: BTreeMap<String, Value>,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("config values serialize");
        self.config.insert(key.to_string(), v);
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// Registers an output and returns its full path inside `out`.
    pub fn output(&mut self, out: &Path, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        out.join(name)
    }

    /// Hashes every input and output and writes `<command>.manifest.json`.
    pub fn finish(&self, out: &Path, command: &str) -> CliResult<PathBuf> {
        let digest = |p: &Path, shown: String| -> CliResult<FileDigest> {
            Ok(FileDigest {
                path: shown,
                sha256: sha256_file(p)?,
            })
        };
        let inputs = self
            .inputs
            .iter()
            .map(|p| digest(p, p.display().to_string()))
            .collect::<CliResult<_>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|n| digest(&out.join(n), n.clone()))
            .collect::<CliResult<_>>()?;
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            config: &self.config,
            inputs,
            outputs,
        };
        let path = out.join(format!("{command}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
