//! One `manifest.json` per output directory, keyed by pipeline stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub command: Vec<String>,
    /// Effective settings after defaults were applied.
    pub config: BTreeMap<String, String>,
    /// sha256 of every input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every artifact, keyed by file name.
    pub outputs: BTreeMap<String, String>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Ok(RunManifest { tool: "convene".into(), version: env!("CARGO_PKG_VERSION").into(), ..Default::default() });
        }
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The manifest without timestamps, for digest comparisons across runs.
    pub fn without_timestamps(&self) -> RunManifest {
        let mut m = self.clone();
        m.stages.values_mut().for_each(|s| s.timestamp.clear());
        m
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Collects the artifacts of one stage run and records them in the
/// directory manifest when finished.
pub struct StageRun {
    name: &'static str,
    dir: PathBuf,
    record: StageRecord,
}

impl StageRun {
    pub fn start(name: &'static str, dir: &Path, command: &[String]) -> Result<StageRun> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(StageRun {
            name,
            dir: dir.to_owned(),
            record: StageRecord { command: command.to_vec(), ..Default::default() },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.record.config.insert(key.to_owned(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = digest_file(path)?;
        self.record.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Writes an artifact atomically and records its digest.
    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        convene::write_atomic(&path, bytes.as_ref()).with_context(|| format!("writing {}", path.display()))?;
        self.record.outputs.insert(name.to_owned(), sha256_hex(bytes.as_ref()));
        Ok(path)
    }

    pub fn finish(mut self) -> Result<StageRecord> {
        self.record.timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let mut manifest = RunManifest::load(&self.dir)?;
        manifest.version = env!("CARGO_PKG_VERSION").into();
        manifest.stages.insert(self.name.to_owned(), self.record.clone());
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.dir.join(MANIFEST);
        convene::write_atomic(&path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.record)
    }
}
