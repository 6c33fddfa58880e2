//! Run directories: `config.txt`, `snap_NNNN.rsff` and `diagnostics.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::SolverConfig;
use super::integrate::{run, Diagnostics, RunSummary};
use super::state::initial_state;
use crate::fields::io as field_io;
use crate::{Error, Result};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CONFIG_FILE: &str = "config.txt";

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:04}.rsff")
}

/// Snapshot files in `dir`, sorted by index.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(index) = name
            .strip_prefix("snap_")
            .and_then(|r| r.strip_suffix(".rsff"))
        {
            if let Ok(i) = index.parse::<usize>() {
                found.push((i, path));
            }
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<Diagnostics>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Runs `config` from its seeded initial state, writing everything into
/// `out`. Diagnostics rows are flushed as they are produced, so an aborted
/// run leaves a readable prefix.
pub fn simulate_to_dir(config: &SolverConfig, out: &Path) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let cfg_path = out.join(CONFIG_FILE);
    fs::write(&cfg_path, config.to_text()).map_err(|e| Error::io(&cfg_path, e))?;
    let (state, _clipped) = initial_state(config)?;
    let diag_path = out.join(DIAGNOSTICS_FILE);
    let mut writer = csv::Writer::from_path(&diag_path)?;
    let summary = run(config, state, |index, s, diag| {
        field_io::write(out.join(snapshot_name(index)), &s.assembled(), s.time())?;
        writer.serialize(diag)?;
        writer.flush().map_err(|e| Error::io(&diag_path, e))
    })?;
    Ok(summary)
}
