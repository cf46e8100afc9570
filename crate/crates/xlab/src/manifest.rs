//! Run directories, output hashing and manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, SeedSource};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Random-stream domain used by a pipeline stage; the per-sample stream is
/// `rng::stream(master, domain, index)`.
#[derive(Clone, Debug, Serialize)]
pub struct SeedStage {
    pub stage: String,
    pub domain: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedLineage {
    pub master: u64,
    pub source: SeedSource,
    pub stages: Vec<SeedStage>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: Option<SeedLineage>,
    /// SHA-256 over the sorted `name:sha256` lines of every CSV output.
    pub content_hash: String,
    pub outputs: Vec<OutputFile>,
    pub timings: Vec<StageTiming>,
    pub report: Option<String>,
    pub assertions: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects outputs and timings of one run inside its output directory.
pub struct Run {
    dir: PathBuf,
    experiment: String,
    outputs: Vec<OutputFile>,
    timings: Vec<StageTiming>,
    seeds: Vec<SeedStage>,
}

impl Run {
    pub fn create(dir: &Path, experiment: &str) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| Error::File { path: dir.into(), source })?;
        Ok(Self {
            dir: dir.into(),
            experiment: experiment.into(),
            outputs: Vec::new(),
            timings: Vec::new(),
            seeds: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn seed_stage(&mut self, stage: &str, domain: u64) {
        self.seeds.push(SeedStage { stage: stage.into(), domain });
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    /// Writes `bytes` to `name` and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| Error::File { path, source })?;
        self.outputs.retain(|o| o.name != name);
        self.outputs.push(OutputFile { name: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Serializes `rows` under `header` and writes the CSV.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn content_hash(&self) -> String {
        let mut lines: Vec<String> =
            self.outputs.iter().filter(|o| o.name.ends_with(".csv")).map(|o| format!("{}:{}", o.name, o.sha256)).collect();
        lines.sort();
        sha256_hex(lines.join("\n").as_bytes())
    }

    /// Writes `manifest.json` for an experiment run and returns it.
    pub fn finish(
        self,
        config: &ExperimentConfig,
        report: Option<&str>,
        assertions: serde_json::Value,
    ) -> Result<RunManifest> {
        let seed = SeedLineage { master: config.seed, source: config.seed_source, stages: self.seeds.clone() };
        self.finish_with(serde_json::to_value(config)?, Some(seed), report, assertions)
    }

    /// Writes `manifest.json` with an arbitrary configuration echo.
    pub fn finish_with(
        self,
        config: serde_json::Value,
        seed: Option<SeedLineage>,
        report: Option<&str>,
        assertions: serde_json::Value,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: self.experiment.clone(),
            config,
            seed,
            content_hash: self.content_hash(),
            outputs: self.outputs.clone(),
            timings: self.timings.clone(),
            report: report.map(String::from),
            assertions,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.path(MANIFEST_FILE);
        fs::write(&path, bytes).map_err(|source| Error::File { path, source })?;
        Ok(manifest)
    }
}

/// Formats a float for CSV; non-finite values become empty cells.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0: pool default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_hash_covers_csv_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::create(dir.path(), "t").unwrap();
        run.write_csv("a.csv", &["x"], &[vec!["1".into()]]).unwrap();
        let h = run.content_hash();
        run.write("b.json", b"{}").unwrap();
        assert_eq!(h, run.content_hash());
        run.write_csv("a.csv", &["x"], &[vec!["2".into()]]).unwrap();
        assert_ne!(h, run.content_hash());
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n2\n");
        let m = run.finish(&ExperimentConfig::default(), None, serde_json::Value::Null).unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert!(dir.path().join(MANIFEST_FILE).exists());
    }

    #[test]
    fn num_blanks_non_finite() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(f64::NAN), "");
    }
}
