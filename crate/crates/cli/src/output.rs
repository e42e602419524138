use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ldl_core::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format, OutputSpec, Sidecar};

/// Tabular view plus a structured JSON view of one experiment.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: serde_json::Value,
    /// `None` for experiments without an acceptance threshold.
    pub check: Option<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub passed: bool,
    pub summary: String,
}

impl Check {
    pub fn new(passed: bool, summary: String) -> Self {
        Self { passed, summary }
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e7)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e7).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn re_im(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                Ok(w.into_inner().context("flushing CSV")?)
            }
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json)?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// SHA-256 of the canonical JSON of the symbol list.
pub fn symbol_digest(config: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(&config.symbols)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

pub fn write(report: &Report, format: Format, out: Option<&Path>, config: &ExperimentConfig) -> Result<()> {
    let bytes = report.render(format)?;
    let Some(path) = out else {
        io::stdout().write_all(&bytes)?;
        return Ok(());
    };
    fs::write(path, &bytes).with_context(|| format!("cannot write {}", path.display()))?;
    let mut saved = config.clone();
    saved.output = Some(OutputSpec {
        path: None,
        format: Some(format),
    });
    let sidecar = Sidecar {
        version: env!("CARGO_PKG_VERSION").to_string(),
        grid: config.model.as_ref().map(|m| m.grid),
        symbol_digest: symbol_digest(config)?,
        config: saved,
    };
    let meta = sidecar_path(path);
    let mut text = serde_json::to_vec_pretty(&sidecar)?;
    text.push(b'\n');
    fs::write(&meta, text).with_context(|| format!("cannot write {}", meta.display()))?;
    Ok(())
}
