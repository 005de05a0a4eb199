//! Artifacts and their `.meta.json` sidecars.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use alterlda_core::config::RunConfig;
use serde_json::json;

use crate::error::CliError;
use crate::params::Params;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// SHA-256 of the effective options of a command.
pub fn config_hash(params: &Params<'_>) -> String {
    let mut effective = RunConfig::default();
    for (k, v) in params.resolved() {
        effective.set(params.section(), k, v);
    }
    effective.hash()
}

pub fn write_sidecar(path: &Path, params: &Params<'_>, seed: u64) -> Result<(), CliError> {
    let parameters: BTreeMap<&str, &str> = params
        .resolved()
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    let meta = json!({
        "tool": "alterlda",
        "version": env!("CARGO_PKG_VERSION"),
        "command": params.section(),
        "seed": seed,
        "config_hash": config_hash(params),
        "config_file": params.config_file().map(|p| p.display().to_string()),
        "parameters": parameters,
    });
    let mut bytes = serde_json::to_vec_pretty(&meta).expect("plain json");
    bytes.push(b'\n');
    let side = sidecar_path(path);
    std::fs::write(&side, bytes).map_err(|e| CliError::io(&side, e))
}

/// Writes `bytes` to `path` together with its sidecar.
pub fn write_artifact(
    path: &Path,
    bytes: &[u8],
    params: &Params<'_>,
    seed: u64,
) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    write_sidecar(path, params, seed)
}
