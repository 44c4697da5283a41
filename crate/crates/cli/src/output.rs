//! Ordered artifact writing, content hashes and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits; round-trips every double.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// `ok` or `warning`.
    pub status: String,
    pub wall_time_s: f64,
    pub threads: usize,
    pub config: serde_json::Value,
    pub counts: serde_json::Value,
    pub warnings: Vec<String>,
    pub result: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

/// Collects the files of one run; writes are sequential and in call order.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<OutputFile>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(OutputFile {
            path: name.to_string(),
            bytes: data.len(),
            sha256: hex::encode(Sha256::digest(data)),
        });
        Ok(())
    }

    /// Comma-separated with a header row and LF line endings.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let data = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write_bytes(name, &data)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut data = to_stable_json(value)?.into_bytes();
        data.push(b'\n');
        self.write_bytes(name, &data)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Pretty JSON with object keys in sorted order.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // `serde_json::Value` keeps keys in a sorted map.
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: i32,
            alpha: i32,
        }
        let s = to_stable_json(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }
}
