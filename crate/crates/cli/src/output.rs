//! Output directory management: the overwrite guard keyed on the
//! configuration hash, CSV writers that stamp that hash into every file,
//! and the closing metadata document.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! a file's bytes are a pure function of the computed values; the wall-clock
//! timing lives only in `meta.json`, keeping the CSVs byte-identical across
//! re-runs and worker counts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

use crate::error::CliError;

/// Ensemble bookkeeping recorded alongside a Monte Carlo run; the split
/// propagator fills the population fields, the plain one leaves them out.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Counts {
    pub n_samples: usize,
    pub n_aborted: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_above: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_below: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rerouted: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_jumps: Option<usize>,
}

/// Per-method summary of a transmit run, in request order.
#[derive(Debug, Clone, Serialize)]
pub struct CurveMeta {
    /// Method tag as written into the CSV rows.
    pub method: String,
    pub n_energies: usize,
    /// Ensemble bookkeeping for curves that ran a Monte Carlo propagator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
}

/// Per-orbit summary of an atlas run, in input order.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitMeta {
    pub orbit_id: usize,
    /// Geometric class, or "failed" when integration was aborted.
    pub class: String,
    /// Why integration stopped, or the error message for failed orbits.
    pub outcome: String,
    pub n_samples: usize,
}

/// The `meta.json` document closing every run.
#[derive(Debug, Serialize)]
struct MetaDoc<'a> {
    schema_version: u32,
    command: &'a str,
    config_sha256: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_traj: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<Counts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curves: Option<Vec<CurveMeta>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbits: Option<Vec<OrbitMeta>>,
    wall_time_s: f64,
    files: Vec<String>,
}

/// An output directory that has passed the overwrite guard. Files register
/// themselves as they are written; [`OutDir::finish`] seals the run with
/// `meta.json`.
pub struct OutDir {
    dir: PathBuf,
    hash: String,
    command: &'static str,
    files: Vec<String>,
    started: Instant,
    pub seed: Option<u64>,
    pub n_traj: Option<usize>,
    pub counts: Option<Counts>,
    pub curves: Option<Vec<CurveMeta>>,
    pub orbits: Option<Vec<OrbitMeta>>,
}

impl OutDir {
    /// Creates (or re-enters) the directory. A directory whose `meta.json`
    /// records a different configuration hash is refused unless `force` is
    /// set; one without readable metadata is treated as free to use.
    pub fn prepare(
        dir: &Path,
        hash: &str,
        command: &'static str,
        force: bool,
    ) -> anyhow::Result<Self> {
        let meta_path = dir.join("meta.json");
        if !force && meta_path.exists() {
            let found = fs::read_to_string(&meta_path)
                .ok()
                .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
                .and_then(|doc| {
                    doc.get("config_sha256")
                        .and_then(|v| v.as_str())
                        .map(str::to_string)
                });
            match found {
                Some(found) if found == hash => {}
                Some(found) => {
                    return Err(CliError::OutputConflict {
                        dir: dir.display().to_string(),
                        found,
                        want: hash.to_string(),
                    }
                    .into())
                }
                None => {
                    return Err(CliError::OutputConflict {
                        dir: dir.display().to_string(),
                        found: "an unreadable meta.json".to_string(),
                        want: hash.to_string(),
                    }
                    .into())
                }
            }
        }
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            command,
            files: Vec::new(),
            started: Instant::now(),
            seed: None,
            n_traj: None,
            counts: None,
            curves: None,
            orbits: None,
        })
    }

    /// Writes a CSV file: a comment line carrying the configuration hash,
    /// the header row, then the data rows.
    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let file =
            File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(w, "# config_sha256 = {}", self.hash)?;
            writeln!(w, "{header}")?;
            for row in rows {
                writeln!(w, "{row}")?;
            }
            w.flush()
        })()
        .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes an arbitrary file through a closure; used for the binary
    /// checkpoint, which carries no hash comment.
    pub fn write_file<F>(&mut self, name: &str, writer: F) -> anyhow::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let file =
            File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writer(&mut w)
            .and_then(|()| w.flush())
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes the effective configuration next to the results it produced.
    pub fn write_config(&mut self, toml_text: &str) -> anyhow::Result<()> {
        let path = self.dir.join("config.toml");
        fs::write(&path, toml_text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push("config.toml".to_string());
        Ok(())
    }

    /// Seals the run: records files, bookkeeping, and elapsed wall time in
    /// `meta.json`. The guard in [`OutDir::prepare`] reads this document.
    pub fn finish(self) -> anyhow::Result<()> {
        let doc = MetaDoc {
            schema_version: crate::config::SCHEMA_VERSION,
            command: self.command,
            config_sha256: &self.hash,
            seed: self.seed,
            n_traj: self.n_traj,
            counts: self.counts,
            curves: self.curves,
            orbits: self.orbits,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            files: self.files,
        };
        let path = self.dir.join("meta.json");
        let text = serde_json::to_string_pretty(&doc).context("serializing meta.json")?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Formats one CSV cell; `None` becomes an empty cell.
pub fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}
