//! The single writer of run artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::run::{Outcome, Table};
use crate::scenario::Scenario;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub method: String,
    /// SHA-256 of `config.toml` as written next to this manifest.
    pub config_sha256: String,
    pub mc_seed: Option<u64>,
    pub mc_paths: Option<usize>,
    pub threads: usize,
    pub wall_times_s: Vec<Stage>,
    pub total_wall_time_s: f64,
    pub files: Vec<String>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Debug, Serialize)]
pub struct Stage {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_table(path: &Path, t: &Table) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    w.write_record(&t.header).map_err(|e| e.to_string())?;
    for r in &t.rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes the resolved config, every table, `checks.csv` and `manifest.json`
/// under `dir`. Returns the manifest path.
pub fn write_all(dir: &Path, scn: &Scenario, outcome: &Outcome, threads: usize, total: f64) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let config = scn.to_toml();
    fs::write(dir.join("config.toml"), &config).map_err(|e| e.to_string())?;
    let mut files = vec!["config.toml".to_string()];
    for (name, t) in &outcome.tables {
        write_table(&dir.join(name), t)?;
        files.push(name.clone());
    }
    if !outcome.checks.is_empty() {
        let mut t = Table {
            header: vec!["check".into(), "result".into(), "detail".into()],
            rows: Vec::new(),
        };
        for c in &outcome.checks {
            t.rows.push(vec![c.name.clone(), if c.pass { "PASS" } else { "FAIL" }.into(), c.detail.clone()]);
        }
        write_table(&dir.join("checks.csv"), &t)?;
        files.push("checks.csv".into());
    }
    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: "uqprop",
        version: env!("CARGO_PKG_VERSION"),
        scenario: scn.name.clone(),
        method: scn.method.name().into(),
        config_sha256: sha256_hex(config.as_bytes()),
        mc_seed: scn.mc.as_ref().map(|m| m.seed),
        mc_paths: scn.mc.as_ref().map(|m| m.n_paths),
        threads,
        wall_times_s: outcome
            .timings
            .iter()
            .map(|(s, t)| Stage {
                stage: s.clone(),
                seconds: *t,
            })
            .collect(),
        total_wall_time_s: total,
        files,
        checks: outcome
            .checks
            .iter()
            .map(|c| CheckEntry {
                name: c.name.clone(),
                pass: c.pass,
                detail: c.detail.clone(),
            })
            .collect(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    fs::write(&path, json + "\n").map_err(|e| e.to_string())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
