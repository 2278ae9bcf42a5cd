//! Files in the output directory and the manifest that inventories them.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST: &str = "manifest.json";

/// Shortest decimal that round-trips; empty for a missing value.
pub fn num(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join(name), text)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut w = csv::Writer::from_path(self.root.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn text(&self, name: &str, body: &str) -> io::Result<()> {
        fs::write(self.root.join(name), body)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub item: String,
    pub kind: String,
    pub error: String,
}

impl Failure {
    pub fn new(item: impl Into<String>, e: &heatpoint_core::Error) -> Self {
        Failure { item: item.into(), kind: e.kind().to_string(), error: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Partial,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskStatus {
    pub task: String,
    pub status: Status,
    pub failures: Vec<Failure>,
}

impl TaskStatus {
    pub fn from_failures(task: &str, failures: Vec<Failure>, total: usize) -> Self {
        let status = if failures.is_empty() {
            Status::Ok
        } else if failures.len() >= total {
            Status::Failed
        } else {
            Status::Partial
        };
        TaskStatus { task: task.to_string(), status, failures }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub tasks: &'a [TaskStatus],
    pub files: Vec<FileEntry>,
}

fn walk(dir: &Path, base: &Path, out: &mut Vec<FileEntry>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            walk(&p, base, out)?;
            continue;
        }
        let rel = p.strip_prefix(base).expect("under root").to_string_lossy().replace('\\', "/");
        if rel == MANIFEST {
            continue;
        }
        let data = fs::read(&p)?;
        out.push(FileEntry { path: rel, bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(&data)) });
    }
    Ok(())
}

/// Every file under the directory except the manifest itself, by path.
pub fn inventory(root: &Path) -> io::Result<Vec<FileEntry>> {
    let mut files = Vec::new();
    walk(root, root, &mut files)?;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

pub fn write_manifest(out: &OutputDir, config: &ExperimentConfig, tasks: &[TaskStatus]) -> io::Result<()> {
    let files = inventory(out.root())?;
    let m = RunManifest { tool: "heatpoint", version: env!("CARGO_PKG_VERSION"), config, tasks, files };
    out.json(MANIFEST, &m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.125, 1.0, 4.4e-154, 1.0 / 3.0, -2.5e300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(opt(None), "");
    }
}
