//! Atomic run directories with a checksummed manifest.
//!
//! Artifacts are staged in a temporary sibling directory and renamed to the
//! final path on success, so an interrupted run never leaves a partial
//! directory where a consumer would look for one.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    code_version: &'a str,
    config: &'a BTreeMap<String, Value>,
    convention_notes: Vec<String>,
    wall_time_seconds: f64,
    files: Vec<FileEntry>,
}

/// Staged run directory; call [`RunDir::finalize`] to publish it.
pub struct RunDir {
    final_path: PathBuf,
    tmp_path: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl RunDir {
    pub fn stage(out_root: &Path, name: &str) -> anyhow::Result<Self> {
        fs::create_dir_all(out_root)?;
        let final_path = out_root.join(name);
        let tmp_path = out_root.join(format!(".tmp-{}-{}", name, std::process::id()));
        if tmp_path.exists() {
            fs::remove_dir_all(&tmp_path)?;
        }
        fs::create_dir_all(&tmp_path)?;
        Ok(RunDir { final_path, tmp_path, files: Vec::new(), started: Instant::now() })
    }

    /// Write one artifact (relative path, may contain subdirectories).
    pub fn write(&mut self, rel: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.tmp_path.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, &text)
    }

    /// Checksum the artifacts, write the manifest and atomically publish.
    pub fn finalize(
        mut self,
        command: &str,
        config: &BTreeMap<String, Value>,
        notes: Vec<String>,
    ) -> anyhow::Result<PathBuf> {
        self.files.sort();
        let mut entries = Vec::new();
        for rel in &self.files {
            let bytes = fs::read(self.tmp_path.join(rel))?;
            let digest = Sha256::digest(&bytes);
            entries.push(FileEntry { path: rel.clone(), sha256: format!("{digest:x}") });
        }
        let manifest = Manifest {
            command,
            code_version: env!("CARGO_PKG_VERSION"),
            config,
            convention_notes: notes,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            files: entries,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.tmp_path.join("manifest.json"), text)?;
        if self.final_path.exists() {
            fs::remove_dir_all(&self.final_path)?;
        }
        fs::rename(&self.tmp_path, &self.final_path)?;
        Ok(self.final_path)
    }
}

/// The convention notes recorded in every manifest: where the implemented
/// formulas deviate from the formal derivation and why.
pub fn convention_notes(lambda: f64) -> Vec<String> {
    vec![
        format!(
            "comparison rule: a << b iff {lambda} * (1 + a) <= b; the derivation's \
             constant 1e6 would empty the << region at practical grid sizes"
        ),
        "gauge equation carries the inclusion-exclusion resonant completion \
         (diagonal line of the cubic splits, pairwise/triple overlaps of the \
         quintic constraint planes); without it the four displayed terms are \
         not the chain image of the dNLS flow"
            .to_string(),
        "sign convention: the cubic mass term enters as -i mu NR(|z|^2 z)".to_string(),
        "Duhamel integrand: no propagator factor inside the time integral; \
         the residual test pins the assembled identity to integrator accuracy"
            .to_string(),
        "window profile: eta = 1 on [-1,1], exp(1 - 1/(1-(|t|-1)^2)) on 1 < |t| < 2, 0 beyond"
            .to_string(),
    ]
}
