//! Run-directory layout, provenance manifest, and the metrics stream.
//!
//! Everything written here is byte-deterministic for a fixed config and
//! seed: no timestamps, sorted keys, canonical float rendering.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xling_core::embeddings::format_float;
use xling_core::linalg::Matrix;

use crate::CliError;

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: PathBuf) -> Self {
        RunDir { root }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn reduced_vec(&self, code: &str) -> PathBuf {
        self.root.join("reduced").join(format!("{code}.vec"))
    }

    pub fn aligned_vec(&self, code: &str) -> PathBuf {
        self.root.join("aligned").join(format!("{code}.vec"))
    }

    pub fn mapping(&self, code: &str) -> PathBuf {
        self.root
            .join("aligned")
            .join(format!("{code}.mapping.txt"))
    }

    pub fn projected_vec(&self, code: &str) -> PathBuf {
        self.root.join("projected").join(format!("{code}.vec"))
    }

    pub fn coverage_text(&self, code: &str) -> PathBuf {
        self.root
            .join("projected")
            .join(format!("{code}.coverage.txt"))
    }

    pub fn coverage_jsonl(&self, code: &str) -> PathBuf {
        self.root
            .join("projected")
            .join(format!("{code}.coverage.jsonl"))
    }

    pub fn final_vec(&self, code: &str) -> PathBuf {
        self.root.join("final").join(format!("{code}.vec"))
    }

    pub fn final_mapping(&self, code: &str) -> PathBuf {
        self.root.join("final").join(format!("{code}.mapping.txt"))
    }

    pub fn sentiment_model(&self) -> PathBuf {
        self.root.join("sentiment").join("model.bin")
    }

    pub fn sentiment_eval(&self, code: &str) -> PathBuf {
        self.root
            .join("sentiment")
            .join(format!("eval-{code}.json"))
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.root.join("metrics.jsonl")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn ensure_parent(&self, path: &Path) -> Result<(), CliError> {
        let parent = path.parent().expect("artifact paths have parents");
        fs::create_dir_all(parent)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", parent.display())))
    }

    /// Resolve the freshest embeddings artifact for a language: final, then
    /// aligned, then reduced.
    pub fn best_embeddings(&self, code: &str) -> Option<PathBuf> {
        [
            self.final_vec(code),
            self.aligned_vec(code),
            self.reduced_vec(code),
        ]
        .into_iter()
        .find(|p| p.is_file())
    }

    pub fn append_metrics(&self, lines: &[serde_json::Value]) -> Result<(), CliError> {
        if lines.is_empty() {
            return Ok(());
        }
        let path = self.metrics_path();
        self.ensure_parent(&path)?;
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
        for line in lines {
            writeln!(f, "{line}")
                .map_err(|e| CliError::data(format!("cannot write metrics: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    config_sha256: String,
    seed: u64,
    tool_version: String,
    /// stage name -> artifact path (run-dir relative) -> sha256
    stages: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Record a completed stage in the manifest: config identity plus a checksum
/// of every file the stage produced.
pub fn record_stage(
    run: &RunDir,
    config_bytes: &[u8],
    seed: u64,
    stage: &str,
    files: &[PathBuf],
) -> Result<(), CliError> {
    let path = run.manifest_path();
    let mut manifest: Manifest = match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_default(),
        Err(_) => Manifest::default(),
    };
    manifest.config_sha256 = sha256_hex(config_bytes);
    manifest.seed = seed;
    manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
    let entry = manifest.stages.entry(stage.to_string()).or_default();
    entry.clear();
    for file in files {
        let bytes = fs::read(file)
            .map_err(|e| CliError::data(format!("cannot hash {}: {e}", file.display())))?;
        let rel = file
            .strip_prefix(run.root())
            .unwrap_or(file)
            .to_string_lossy()
            .replace('\\', "/");
        entry.insert(rel, sha256_hex(&bytes));
    }
    run.ensure_parent(&path)?;
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Text matrix format: a `dim` header line, then one row per line.
pub fn save_matrix(matrix: &Matrix<f64>, path: &Path) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("{}\n", matrix.rows()));
    for i in 0..matrix.rows() {
        let row: Vec<String> = matrix.row(i).iter().map(|&v| format_float(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}
