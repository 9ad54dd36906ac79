//! One `manifest.json` per output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{CliError, CliResult};
use crate::formats::RunManifest;
use crate::io::Ledger;

pub const MANIFEST_NAME: &str = "manifest.json";

fn directory_of(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes (replacing) the manifest of every directory that received output.
/// Commands writing only to stdout leave no manifest.
pub fn write_manifests(args: &[String], ledger: &Ledger, wall: Duration) -> CliResult<Vec<PathBuf>> {
    let mut by_dir: BTreeMap<PathBuf, Vec<String>> = BTreeMap::new();
    for p in &ledger.outputs {
        by_dir.entry(directory_of(p)).or_default().push(p.display().to_string());
    }
    let mut written = Vec::new();
    for (dir, outputs) in by_dir {
        let m = RunManifest {
            command_line: args.to_vec(),
            seeds: ledger.seeds.clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            input_hashes: ledger.inputs.clone(),
            output_paths: outputs,
            wall_time_s: wall.as_secs_f64(),
        };
        let path = dir.join(MANIFEST_NAME);
        let mut s = serde_json::to_string_pretty(&m).expect("serializable");
        s.push('\n');
        std::fs::write(&path, s).map_err(|e| CliError::io(path.display().to_string(), e))?;
        written.push(path);
    }
    Ok(written)
}
