//! Output plumbing: CSV rows, checksums, the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("checksum {}", path.display()), e))?;
    Ok(sha256_hex(&bytes))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("create {}", dir.display()), e))
}

/// Write via a temp file and rename, so a reader never sees a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let stage = format!("write {}", path.display());
    fs::write(&tmp, bytes).map_err(|e| Error::io(stage.clone(), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(stage, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut s = String::with_capacity(rows.len() * 64 + header.len() + 1);
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

/// Append-only CSV writer that flushes every row.
pub struct CsvAppender {
    file: fs::File,
    path: PathBuf,
}

impl CsvAppender {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
        writeln!(file, "{header}").map_err(|e| Error::io("csv header", e))?;
        Ok(CsvAppender { file, path: path.to_path_buf() })
    }

    pub fn append_to(path: &Path) -> Result<Self> {
        let file = fs::OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(format!("open {}", path.display()), e))?;
        Ok(CsvAppender { file, path: path.to_path_buf() })
    }

    pub fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(format!("append {}", self.path.display()), e))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StageStatus {
    pub stage: String,
    pub status: String,
}

/// Everything needed to tell whether two runs are the same run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub parallel: bool,
    pub stages: Vec<StageStatus>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        RunManifest {
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            parallel: crate::par::is_parallel(),
            stages: vec![],
            files: vec![],
        }
    }

    pub fn stage(&mut self, stage: &str, status: &str) {
        self.stages.push(StageStatus { stage: stage.into(), status: status.into() });
    }

    /// Checksum the listed files (relative to `dir`) and write manifest.json.
    pub fn finish(mut self, dir: &Path, names: &[&str]) -> Result<RunManifest> {
        self.files.clear();
        for n in names {
            let p = dir.join(n);
            if p.exists() {
                self.files.push(FileEntry { path: n.to_string(), sha256: sha256_file(&p)? });
            }
        }
        write_json(&dir.join("manifest.json"), &self)?;
        Ok(self)
    }
}
