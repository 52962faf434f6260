use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{PipelineConfig, Subcommand};
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Collects the files of one run and writes the manifest last.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'static str,
    config_sha256: String,
    seed: Option<u64>,
    versions: Versions,
    artifacts: &'a [FileEntry],
}

#[derive(Debug, Serialize)]
struct Versions {
    #[serde(rename = "timescale-core")]
    core: &'static str,
    #[serde(rename = "timescale-cli")]
    cli: &'static str,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), data)?;
        log::debug!("wrote {name} ({} bytes)", data.len());
        self.files.push(FileEntry {
            file: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len(),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut data = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
        data.push(b'\n');
        self.bytes(name, &data)
    }

    /// Runs a writer into memory and stores the result.
    pub fn with<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> timescale_core::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.bytes(name, &buf)
    }

    pub fn finish(mut self, cmd: Subcommand, cfg: &PipelineConfig, seed: Option<u64>) -> Result<Vec<FileEntry>, CliError> {
        self.files.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = Manifest {
            subcommand: cmd.name(),
            config_sha256: sha256_hex(&cfg.canonical_json()),
            seed,
            versions: Versions {
                core: timescale_core::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            artifacts: &self.files,
        };
        let mut data = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
        data.push(b'\n');
        fs::write(self.dir.join(MANIFEST), &data)?;
        Ok(self.files)
    }
}
