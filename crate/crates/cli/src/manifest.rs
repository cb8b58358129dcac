//! Run manifests: the resolved configuration, seed, code version, wall-clock
//! time and SHA-256 digests of every input and output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Inputs: the path as given on the command line. Outputs: relative to
    /// the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub deterministic: bool,
    /// Seconds since the Unix epoch; `None` in deterministic runs.
    pub wall_clock_unix_s: Option<f64>,
    pub config: Vec<(String, String)>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, deterministic: bool, config: Vec<(String, String)>) -> Self {
        let wall_clock_unix_s = (!deterministic)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0));
        Self {
            command: command.to_string(),
            version: concat!("chanforecast ", env!("CARGO_PKG_VERSION")).to_string(),
            seed,
            deterministic,
            wall_clock_unix_s,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileDigest {
            path: path.to_string_lossy().into_owned(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Records `file`, which must live in `dir`.
    pub fn add_output(&mut self, dir: &Path, file: &str) -> Result<(), CliError> {
        self.outputs.push(FileDigest {
            path: file.to_string(),
            sha256: sha256_file(&dir.join(file))?,
        });
        Ok(())
    }

    /// Writes `<command>.manifest.json` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Recomputes every digest; lists the files whose digest differs.
    /// Relative input paths resolve against `cwd`.
    pub fn verify(&self, manifest_dir: &Path, cwd: &Path) -> Result<Vec<String>, CliError> {
        let mut bad = Vec::new();
        for f in &self.inputs {
            let p = Path::new(&f.path);
            let p = if p.is_absolute() { p.to_path_buf() } else { cwd.join(p) };
            if sha256_file(&p)? != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        for f in &self.outputs {
            if sha256_file(&manifest_dir.join(&f.path))? != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}
