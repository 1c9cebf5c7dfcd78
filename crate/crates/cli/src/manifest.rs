use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::UsageError;

#[derive(Debug, Serialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a subcommand.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub inputs: Vec<FileRecord>,
    pub config: Option<FileRecord>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub outputs: Vec<FileRecord>,
    pub version: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn record(path: &Path) -> Result<FileRecord> {
    Ok(FileRecord {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Collects inputs and planned outputs of one run; refuses any output that
/// would replace an input.
pub struct Run {
    subcommand: &'static str,
    inputs: Vec<PathBuf>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out_dir: PathBuf,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(subcommand: &'static str, out_dir: &Path) -> Self {
        Self {
            subcommand,
            inputs: Vec::new(),
            config: None,
            seed: None,
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
        }
    }

    /// Registers an input file, failing with a usage error if it is missing.
    pub fn input(&mut self, path: &Path) -> Result<PathBuf> {
        if !path.is_file() {
            return Err(UsageError(format!("input file not found: {}", path.display())).into());
        }
        self.inputs.push(path.to_path_buf());
        Ok(path.to_path_buf())
    }

    pub fn config(&mut self, path: Option<&Path>) -> Result<Option<String>> {
        let Some(path) = path else { return Ok(None) };
        if !path.is_file() {
            return Err(UsageError(format!("config file not found: {}", path.display())).into());
        }
        self.config = Some(path.to_path_buf());
        Ok(Some(
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        ))
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Path of an output file inside the output directory.
    pub fn output(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        let clashes = self
            .inputs
            .iter()
            .chain(&self.config)
            .any(|input| same_file(input, &path));
        if clashes {
            return Err(UsageError(format!(
                "output {} would overwrite an input; choose another --out-dir",
                path.display()
            ))
            .into());
        }
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn create_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))
    }

    /// Writes `<subcommand>.manifest.json` beside the outputs.
    pub fn finish(mut self) -> Result<PathBuf> {
        let path = self.output(&format!("{}.manifest.json", self.subcommand))?;
        self.outputs.pop();
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            argv: std::env::args().collect(),
            inputs: self
                .inputs
                .iter()
                .map(|p| record(p))
                .collect::<Result<_>>()?,
            config: self.config.as_deref().map(record).transpose()?,
            seed: self.seed,
            workers: rayon::current_num_threads(),
            out_dir: self.out_dir.clone(),
            outputs: self
                .outputs
                .iter()
                .filter(|p| p.exists())
                .map(|p| record(p))
                .collect::<Result<_>>()?,
            version: format!("bayesrank {}", env!("CARGO_PKG_VERSION")),
        };
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
