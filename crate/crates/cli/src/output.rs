//! Atomic file output, table serialisation and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use jchsim::scenario::{InvariantCheck, OutputFormat, ResolvedScenario, ScenarioOutput, Table};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn table_csv(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

pub fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Collects files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(OutputDir { root, files: vec![] })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write_table(&mut self, t: &Table, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write(&format!("{}.csv", t.name), &table_csv(t)?),
            OutputFormat::Json => self.write(&format!("{}.json", t.name), &to_json_bytes(t)?),
        }
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_id: String,
    pub version: String,
    /// Config as supplied, before defaults were filled in.
    pub config: serde_json::Value,
    pub resolved: ResolvedScenario,
    pub wall_time_s: f64,
    pub deterministic: bool,
    pub invariants: Vec<InvariantCheck>,
    pub invariants_passed: bool,
    pub files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario_id: &'a str,
    summary: &'a BTreeMap<String, f64>,
}

/// Writes every table plus `summary.json`, then `manifest.json` last.
pub fn write_scenario(
    dir: &mut OutputDir,
    out: &ScenarioOutput,
    config: serde_json::Value,
    format: OutputFormat,
    wall_time_s: f64,
) -> Result<RunManifest> {
    for t in &out.tables {
        dir.write_table(t, format)?;
    }
    dir.write(
        "summary.json",
        &to_json_bytes(&Summary { scenario_id: out.scenario_id.as_str(), summary: &out.summary })?,
    )?;
    let manifest = RunManifest {
        scenario_id: out.scenario_id.as_str().to_string(),
        version: crate::VERSION.to_string(),
        config,
        resolved: out.resolved.clone(),
        wall_time_s,
        deterministic: true,
        invariants: out.checks.clone(),
        invariants_passed: out.all_checks_passed(),
        files: dir.files().to_vec(),
    };
    write_atomic(&dir.root().join("manifest.json"), &to_json_bytes(&manifest)?)?;
    Ok(manifest)
}
