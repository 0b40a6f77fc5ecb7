//! Output management: run directories, manifests, JSONL and CSV writers.

use anyhow::{Context, Result};
use gibbslab::report::{Manifest, RunRecord};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
    Both,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            "both" => Ok(Format::Both),
            other => Err(format!(
                "unknown format {other:?} (expected jsonl|csv|both)"
            )),
        }
    }
}

pub struct OutputDir {
    dir: PathBuf,
    format: Format,
}

impl OutputDir {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            format,
        })
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let path = self.dir.join("manifest.json");
        let body = serde_json::to_string_pretty(manifest)?;
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(value)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Write run records as JSONL (one record per line) and/or CSV with
    /// identical columns, per the configured format.
    pub fn write_records(&self, stem: &str, records: &[RunRecord]) -> Result<()> {
        if matches!(self.format, Format::Jsonl | Format::Both) {
            let path = self.dir.join(format!("{stem}.jsonl"));
            let mut f =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            for r in records {
                serde_json::to_writer(&mut f, r)?;
                f.write_all(b"\n")?;
            }
        }
        if matches!(self.format, Format::Csv | Format::Both) {
            let path = self.dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            w.write_record([
                "op",
                "dim",
                "radial",
                "p",
                "cutoff",
                "n_cut",
                "r",
                "m",
                "samples",
                "seed",
                "chunks",
                "mean",
                "stderr",
                "running_max",
                "wall_ms",
                "notes",
            ])?;
            for r in records {
                w.write_record([
                    r.op.clone(),
                    r.dim.to_string(),
                    r.radial.to_string(),
                    opt(r.p),
                    opt(r.cutoff),
                    r.n_cut.map(|v| v.to_string()).unwrap_or_default(),
                    opt(r.r),
                    r.m.map(|v| v.to_string()).unwrap_or_default(),
                    r.samples.to_string(),
                    r.seed.to_string(),
                    r.chunks.to_string(),
                    format_f64(r.mean),
                    r.stderr.map(format_f64).unwrap_or_default(),
                    format_f64(r.running_max),
                    r.wall_ms.to_string(),
                    r.notes.join(" | "),
                ])?;
            }
            w.flush()?;
        }
        Ok(())
    }

    /// Write an arbitrary serializable table as CSV via serde.
    pub fn write_csv_rows<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// Shortest-roundtrip float formatting (matches the JSONL encoding).
fn format_f64(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json uses ryu internally; route through it for identical digits.
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}
