use std::collections::BTreeMap;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swarmcalc::io::IoError;
use swarmcalc::Execution;

use crate::error::CliError;

pub const SEED_ENV: &str = "SWARMCALC_SEED";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, with the effective seed spelled out.
    pub argv: Vec<String>,
    pub options: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub cwd: PathBuf,
    /// sha256 of every input file.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every output file.
    pub outputs: BTreeMap<String, String>,
    pub stdout_sha256: String,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: not a run manifest: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Inputs read, outputs written and text printed by one command.
pub struct Context {
    pub exec: Execution,
    /// Replays ignore the seed environment variable.
    pub ignore_seed_env: bool,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub stdout: String,
    pub seeds: Vec<u64>,
}

impl Context {
    pub fn new(exec: Execution, ignore_seed_env: bool) -> Self {
        Context {
            exec,
            ignore_seed_env,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            stdout: String::new(),
            seeds: Vec::new(),
        }
    }

    /// `--seed`, unless the environment overrides it.
    pub fn seed(&mut self, flag: u64) -> Result<u64, CliError> {
        let seed = match std::env::var(SEED_ENV) {
            Ok(v) if !self.ignore_seed_env => v.trim().parse().map_err(|_| {
                CliError::usage(format!("{SEED_ENV}={v} is not an unsigned 64-bit integer"))
            })?,
            _ => flag,
        };
        self.seeds.push(seed);
        Ok(seed)
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn parse_input<T>(
        &mut self,
        path: &Path,
        parse: impl FnOnce(Cursor<Vec<u8>>) -> Result<T, IoError>,
    ) -> Result<T, CliError> {
        let bytes = self.read_input(path)?;
        parse(Cursor::new(bytes)).map_err(|e| CliError::from_csv(path, e))
    }

    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        self.outputs
            .insert(path.display().to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_csv(
        &mut self,
        path: &Path,
        write: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
        self.write_output(path, &buf)
    }

    /// Writes to `path` when given, else to standard output.
    pub fn emit_csv(
        &mut self,
        path: Option<&Path>,
        write: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>,
    ) -> Result<(), CliError> {
        match path {
            Some(p) => self.write_csv(p, write),
            None => {
                let mut buf = Vec::new();
                write(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
                self.stdout.push_str(&String::from_utf8_lossy(&buf));
                Ok(())
            }
        }
    }

    pub fn print(&mut self, text: &str) {
        self.stdout.push_str(text);
        if !text.ends_with('\n') {
            self.stdout.push('\n');
        }
    }
}

/// The argument list with any `--seed` replaced by `seed`.
pub fn argv_with_seed(args: &[String], seed: Option<u64>) -> Vec<String> {
    let Some(seed) = seed else {
        return args.to_vec();
    };
    let mut out = Vec::with_capacity(args.len() + 2);
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--seed" {
            it.next();
        } else if !a.starts_with("--seed=") {
            out.push(a.clone());
        }
    }
    out.push("--seed".into());
    out.push(seed.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_rewritten() {
        let args: Vec<String> = ["simulate", "--seed", "3", "--n", "4", "--seed=9"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            argv_with_seed(&args, Some(7)),
            ["simulate", "--n", "4", "--seed", "7"]
        );
        assert_eq!(argv_with_seed(&args, None), args);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
