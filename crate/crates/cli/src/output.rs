//! Artifact writers. Every file written through [`Artifacts`] is checksummed
//! into the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelTiming {
    pub n: u32,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// The effective configuration as TOML; `--config manifest.json` replays it.
    pub config: String,
    pub wall_seconds: f64,
    pub level_timing: Vec<LevelTiming>,
    pub outputs: Vec<FileEntry>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
    timing: Vec<LevelTiming>,
    start: Instant,
}

impl Artifacts {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new(), timing: Vec::new(), start: Instant::now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
        I: IntoIterator<Item = R>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.put(name, &bytes)
    }

    /// Runs `f` and records its wall time against level `n`.
    pub fn timed<T>(&mut self, n: u32, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timing.push(LevelTiming { n, seconds: t.elapsed().as_secs_f64() });
        out
    }

    pub fn finish(self, cfg: &RunConfig, command: &str, exit_code: i32, message: Option<String>) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            version: VERSION.to_string(),
            config: cfg.to_toml(),
            wall_seconds: self.start.elapsed().as_secs_f64(),
            level_timing: self.timing,
            outputs: self.files,
            exit_code,
            message,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.dir.join(MANIFEST), bytes)?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_of_empty_input() {
        assert_eq!(
            hex(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn csv_quotes_fields() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(dir.path()).unwrap();
        a.csv("x.csv", &["a", "b"], [vec!["1,2".to_string(), "plain".to_string()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "a,b\n\"1,2\",plain\n");
        assert_eq!(a.files[0].bytes, text.len() as u64);
    }
}
