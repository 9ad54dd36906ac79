//! Reading inputs and writing outputs; `None` paths mean stdin / stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Inputs read and outputs written by one command, for the manifest.
#[derive(Debug, Default)]
pub struct Ledger {
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Ledger {
    pub fn read_bytes(&mut self, path: Option<&Path>) -> CliResult<Vec<u8>> {
        match path {
            Some(p) => {
                let bytes = fs::read(p).map_err(|e| CliError::io(p.display().to_string(), e))?;
                self.inputs.insert(p.display().to_string(), sha256_hex(&bytes));
                Ok(bytes)
            }
            None => {
                let mut buf = Vec::new();
                std::io::stdin().read_to_end(&mut buf).map_err(|e| CliError::io("<stdin>", e))?;
                self.inputs.insert("<stdin>".into(), sha256_hex(&buf));
                Ok(buf)
            }
        }
    }

    pub fn read_json<T: DeserializeOwned>(&mut self, path: Option<&Path>, what: &str) -> CliResult<T> {
        let bytes = self.read_bytes(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::parse(what, e))
    }

    pub fn write_text(&mut self, path: Option<&Path>, text: &str) -> CliResult<()> {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
                }
                fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e))?;
                self.outputs.push(p.to_path_buf());
                Ok(())
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }

    pub fn write_json<T: Serialize>(&mut self, path: Option<&Path>, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write_text(path, &s)
    }
}
