//! Output files. Each one carries the version, the config hash and the
//! seed list; nothing time-dependent is written, so identical inputs give
//! identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
}

impl Provenance {
    pub fn new(command: &'static str, cfg: &RunConfig, seeds: Vec<u64>) -> Self {
        let canonical = serde_json::to_vec(&cfg.fingerprint()).expect("config serialises");
        let digest = Sha256::digest(&canonical);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { version: env!("CARGO_PKG_VERSION"), command, config_sha256, seeds }
    }

    fn csv_header(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        format!(
            "# mg-cavity {} {}\n# config_sha256 {}\n# seeds {}\n",
            self.version,
            self.command,
            self.config_sha256,
            if seeds.is_empty() { "none".to_string() } else { seeds.join(" ") }
        )
    }
}

/// Output directory, created on first write.
pub struct Sink {
    pub dir: PathBuf,
    pub prov: Provenance,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: &'a Provenance,
    data: &'a T,
}

impl Sink {
    pub fn new(dir: &Path, prov: Provenance) -> Self {
        Self { dir: dir.to_path_buf(), prov, written: Vec::new() }
    }

    fn path(&mut self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)?;
        let p = self.dir.join(name);
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<(), CliError> {
        let p = self.path(name)?;
        let mut s = serde_json::to_string_pretty(&Envelope { provenance: &self.prov, data }).map_err(|e| CliError::Run(e.to_string()))?;
        s.push('\n');
        fs::write(p, s)?;
        Ok(())
    }

    /// CSV whose first lines are `#` comments with the provenance.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let p = self.path(name)?;
        let mut f = fs::File::create(p)?;
        f.write_all(self.prov.csv_header().as_bytes())?;
        f.write_all(body.as_bytes())?;
        Ok(())
    }

    /// Binary payload preceded by a length-prefixed JSON provenance block.
    pub fn binary(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let p = self.path(name)?;
        let head = serde_json::to_vec(&self.prov).map_err(|e| CliError::Run(e.to_string()))?;
        let mut f = fs::File::create(p)?;
        f.write_all(&(head.len() as u64).to_le_bytes())?;
        f.write_all(&head)?;
        f.write_all(body)?;
        Ok(())
    }
}
