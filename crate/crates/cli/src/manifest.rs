//! `manifest.json`: resolved inputs and checksums of every output file.
//! No timestamps, so identical runs give identical manifests.

use std::fs;
use std::io::Read;
use std::path::Path;

use manprasim_core::Scenario;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::to_toml;
use crate::error::CliError;
use crate::scenario::Plan;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepartmentEntry {
    pub name: String,
    /// Full resolved config in the TOML file format.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub id: String,
    pub department: String,
    pub staffing: [u32; 4],
    pub mix: [u32; 5],
    pub mix_label: String,
    pub weeks: f64,
    pub replications: u32,
    pub master_seed: u64,
}

impl ScenarioEntry {
    fn of(s: &Scenario) -> Self {
        let st = &s.department.staffing;
        Self {
            id: s.id.clone(),
            department: s.department.name.clone(),
            staffing: [st.normal_sellers, st.expert_sellers, st.cashiers, st.managers],
            mix: s.mix.0,
            mix_label: s.mix_label.clone(),
            weeks: s.weeks,
            replications: s.replications,
            master_seed: s.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub master_seed: u64,
    /// Where the seed came from: flag, scenario, env or default.
    pub seed_source: String,
    pub fast: bool,
    pub emit_visit_log: bool,
    pub config_paths: Vec<String>,
    pub output_dir: String,
    pub departments: Vec<DepartmentEntry>,
    pub scenarios: Vec<ScenarioEntry>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<(u64, String)> {
    let mut f = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        total += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok((total, hex::encode(hasher.finalize())))
}

impl RunManifest {
    pub fn new(plan: &Plan, fast: bool, emit_visit_log: bool, out: &Path) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: plan.name.clone(),
            master_seed: plan.seed,
            seed_source: plan.seed_source.to_string(),
            fast,
            emit_visit_log,
            config_paths: plan.config_paths.iter().map(|p| p.display().to_string()).collect(),
            output_dir: out.display().to_string(),
            departments: plan
                .departments
                .iter()
                .map(|d| DepartmentEntry {
                    name: d.name.clone(),
                    config: to_toml(d),
                })
                .collect(),
            scenarios: plan.scenarios.iter().map(ScenarioEntry::of).collect(),
            files: Vec::new(),
        }
    }

    /// Record checksums for `names` (relative to `dir`), sorted by name.
    pub fn add_files(&mut self, dir: &Path, names: &[String]) -> Result<(), CliError> {
        let mut names = names.to_vec();
        names.sort();
        for name in names {
            let path = dir.join(&name);
            let (bytes, sha256) =
                sha256_file(&path).map_err(|e| CliError::io(format!("hashing {}", path.display()), e))?;
            self.files.push(FileEntry { name, bytes, sha256 });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}

/// Recompute the checksums listed in `dir/manifest.json`. Returns the names
/// of files that are missing or differ.
pub fn verify(dir: &Path) -> Result<Vec<String>, CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut bad = Vec::new();
    for f in &manifest.files {
        match sha256_file(&dir.join(&f.name)) {
            Ok((bytes, sum)) if bytes == f.bytes && sum == f.sha256 => {}
            _ => bad.push(f.name.clone()),
        }
    }
    Ok(bad)
}
