//! Serializable run records shared by the CLI and the test suites.

use crate::mc::McEstimate;
use serde::{Deserialize, Serialize};

/// One JSONL record: an operation, its parameters, and its estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub op: String,
    pub dim: u32,
    pub radial: bool,
    pub p: Option<f64>,
    pub cutoff: Option<f64>,
    pub n_cut: Option<usize>,
    pub r: Option<f64>,
    pub m: Option<usize>,
    pub samples: u64,
    pub seed: u64,
    pub chunks: u32,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub running_max: f64,
    pub wall_ms: u64,
    /// Free-form annotations ("diagnostic: ..." stamps and the like).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunRecord {
    pub fn from_estimate(op: &str, dim: u32, radial: bool, est: &McEstimate, wall_ms: u64) -> Self {
        RunRecord {
            op: op.to_string(),
            dim,
            radial,
            p: None,
            cutoff: None,
            n_cut: None,
            r: None,
            m: None,
            samples: est.n_samples,
            seed: est.seed,
            chunks: est.chunks,
            mean: est.mean,
            stderr: est.stderr,
            running_max: est.running_max,
            wall_ms,
            notes: Vec::new(),
        }
    }

    /// The record with the wall-clock field zeroed, for bit-identical
    /// reproducibility comparisons.
    pub fn without_wall_time(mut self) -> Self {
        self.wall_ms = 0;
        self
    }
}

/// Reproducibility manifest written next to every command's outputs: enough
/// to re-run bit-identically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub chunk_size: usize,
    pub tolerances: serde_json::Value,
}
