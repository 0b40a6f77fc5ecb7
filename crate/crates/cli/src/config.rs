//! Experiment configuration: a JSON file, flags overriding it, and validation
//! that rejects bad parameter combinations with a machine-readable error.

use anyhow::{Context, Result};
use gibbslab::Geometry;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// On-disk configuration; every field optional, flags take precedence.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct FileConfig {
    pub dim: Option<u32>,
    pub radial: Option<bool>,
    pub p: Option<f64>,
    pub cutoff_k: Option<f64>,
    pub r: Option<f64>,
    pub modes: Option<usize>,
    pub modes_grid: Option<Vec<usize>>,
    pub m_grid: Option<Vec<usize>>,
    pub p_list: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub cutoff_list: Option<Vec<f64>>,
    pub tail_cut: Option<usize>,
    pub n_factor: Option<usize>,
    pub nmax: Option<usize>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub indicator_inside: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&body).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// A config rejection with the full list of violated constraints.
#[derive(Debug, Serialize)]
pub struct ConfigRejection {
    pub error: &'static str,
    pub violations: Vec<String>,
}

impl std::fmt::Display for ConfigRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}",
            serde_json::to_string(self).unwrap_or_else(|_| "config rejected".into())
        )
    }
}

impl std::error::Error for ConfigRejection {}

/// Build and validate the geometry, returning every violation at once.
pub fn resolve_geometry(dim: u32, radial: bool) -> std::result::Result<Geometry, ConfigRejection> {
    Geometry::new(dim, radial).map_err(|e| ConfigRejection {
        error: "config",
        violations: vec![e.to_string()],
    })
}

pub fn reject(violations: Vec<String>) -> ConfigRejection {
    ConfigRejection {
        error: "config",
        violations,
    }
}

/// Flag-over-file merge helper.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
