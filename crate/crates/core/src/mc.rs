//! Deterministic chunked Monte Carlo: counter-based streams, streaming
//! moments, order-independent merging, and log-log power fits.
//!
//! Reproducibility contract: a run is fully determined by
//! (root_seed, chunk_size, sample count). Chunks own disjoint ChaCha streams
//! derived from the root seed, are evaluated in parallel, and are merged in
//! chunk order, so results are bit-identical for any thread count.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default number of samples evaluated per chunk (and per RNG stream).
pub const DEFAULT_CHUNK_SIZE: usize = 2500;

/// Below this sample count the sample variance is too noisy to quote; the
/// estimate refuses to report a standard error.
pub const MIN_SAMPLES_FOR_STDERR: u64 = 100;

/// A counter-based random stream: (root_seed, stream_id, position) fully
/// determine every draw, and distinct stream ids give independent streams.
pub struct RngStream {
    root_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position of the stream in 32-bit words drawn so far.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// One standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Fill a slice with standard normal draws.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.normal();
        }
    }
}

/// Derive the `stream_id`-th independent stream of a root seed.
pub fn derive_stream(root_seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(stream_id);
    RngStream {
        root_seed,
        stream_id,
        rng,
    }
}

/// Streaming mean/variance accumulator (Welford), tagged with an estimator
/// label so incompatible merges are rejected.
#[derive(Clone, Debug)]
pub struct Accumulator {
    label: u64,
    n: u64,
    mean: f64,
    m2: f64,
    max: f64,
}

impl Accumulator {
    pub fn new(label: u64) -> Self {
        Accumulator {
            label,
            n: 0,
            mean: 0.0,
            m2: 0.0,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn label(&self) -> u64 {
        self.label
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        if x > self.max {
            self.max = x;
        }
    }

    /// Parallel-reduction merge. Associative and order-independent up to
    /// floating-point roundoff (documented tolerance: relative 1e-12).
    pub fn merge(&self, other: &Accumulator) -> Result<Accumulator> {
        if self.label != other.label {
            return Err(Error::Contract(format!(
                "merging incompatible estimators ({} vs {})",
                self.label, other.label
            )));
        }
        if other.n == 0 {
            return Ok(self.clone());
        }
        if self.n == 0 {
            return Ok(other.clone());
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Ok(Accumulator {
            label: self.label,
            n,
            mean,
            m2,
            max: self.max.max(other.max),
        })
    }

    pub fn finish(&self, seed: u64, chunks: u32, chunk_size: usize) -> McEstimate {
        let stderr = if self.n >= MIN_SAMPLES_FOR_STDERR {
            Some((self.variance() / self.n as f64).sqrt())
        } else {
            None
        };
        McEstimate {
            mean: self.mean,
            stderr,
            n_samples: self.n,
            seed,
            chunks,
            chunk_size,
            running_max: self.max,
        }
    }
}

/// A finished Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean; absent for fewer than
    /// [`MIN_SAMPLES_FOR_STDERR`] samples.
    pub stderr: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub chunks: u32,
    pub chunk_size: usize,
    /// Largest single-sample value seen (heavy tails are reported, not hidden).
    pub running_max: f64,
}

impl McEstimate {
    /// stderr, treating a refused report as zero spread (useful in tests that
    /// always run enough samples).
    pub fn stderr_or_zero(&self) -> f64 {
        self.stderr.unwrap_or(0.0)
    }

    /// √(se_a² + se_b²) for two-estimate comparisons.
    pub fn combined_stderr(&self, other: &McEstimate) -> f64 {
        (self.stderr_or_zero().powi(2) + other.stderr_or_zero().powi(2)).sqrt()
    }
}

/// Chunk layout for a requested sample count: sample totals are rounded up to
/// whole chunks so that `n_samples = chunks × chunk_size` exactly.
pub fn chunk_layout(samples: u64, chunk_size: usize) -> (u32, u64) {
    let cs = chunk_size.max(1) as u64;
    let chunks = samples.div_ceil(cs).max(1);
    (chunks as u32, chunks * cs)
}

/// Run a chunked Monte Carlo estimate.
///
/// `eval` receives a fresh stream and a per-chunk accumulator and must push
/// exactly `chunk_size` sample values. Chunks run in parallel; the reduction
/// is a sequential fold in chunk order, so the result does not depend on the
/// rayon pool size.
pub fn run_chunked<F>(label: u64, samples: u64, chunk_size: usize, seed: u64, eval: F) -> McEstimate
where
    F: Fn(&mut RngStream, usize, &mut Accumulator) + Sync,
{
    let (chunks, _total) = chunk_layout(samples, chunk_size);
    let parts: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = derive_stream(seed, c as u64);
            let mut acc = Accumulator::new(label);
            eval(&mut stream, chunk_size, &mut acc);
            acc
        })
        .collect();
    let mut total = Accumulator::new(label);
    for part in &parts {
        total = total.merge(part).expect("uniform labels by construction");
    }
    total.finish(seed, chunks, chunk_size)
}

/// Least-squares power-law fit y = C x^e on log-log coordinates.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    /// Goodness of fit in [0, 1]; defined as 1 for exactly constant data.
    pub r_squared: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Domain(
            "power-law fit requires strictly positive coordinates".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let sy: f64 = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - sx) * (p.0 - sx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(
            "power-law fit needs distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = sy - slope * sx;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - sy) * (p.1 - sy)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * n {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(PowerFit {
        exponent: slope,
        log_prefactor: intercept,
        r_squared,
    })
}

/// Stable label for an estimator identity, derived from its descriptor string
/// (FNV-1a).
pub fn estimator_label(descriptor: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in descriptor.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a1 = derive_stream(42, 0);
        let mut a2 = derive_stream(42, 0);
        let mut b = derive_stream(42, 1);
        let xs1: Vec<f64> = (0..1000).map(|_| a1.normal()).collect();
        let xs2: Vec<f64> = (0..1000).map(|_| a2.normal()).collect();
        let ys: Vec<f64> = (0..1000).map(|_| b.normal()).collect();
        assert_eq!(xs1, xs2);
        assert_ne!(xs1, ys);
    }

    #[test]
    fn paired_streams_decorrelated() {
        let n = 100_000;
        let mut s0 = derive_stream(7, 0);
        let mut s1 = derive_stream(7, 1);
        let mut dot = 0.0;
        for _ in 0..n {
            dot += s0.normal() * s1.normal();
        }
        let corr = dot / n as f64;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn normal_moments_within_bounds() {
        let n = 1_000_000usize;
        let mut s = derive_stream(3, 5);
        let mut acc = Accumulator::new(0);
        for _ in 0..n {
            acc.push(s.normal());
        }
        let rootn = (n as f64).sqrt();
        assert!(acc.mean().abs() <= 4.0 / rootn);
        assert!((acc.variance() - 1.0).abs() <= 6.0 / rootn);
    }

    #[test]
    fn merge_identity_and_symmetry() {
        let mut a = Accumulator::new(9);
        let mut b = Accumulator::new(9);
        let empty = Accumulator::new(9);
        let mut s = derive_stream(1, 0);
        let mut single = Accumulator::new(9);
        for i in 0..5000 {
            let x = s.normal() + 0.25;
            if i % 2 == 0 {
                a.push(x);
            } else {
                b.push(x);
            }
            single.push(x);
        }
        let ea = a.merge(&empty).unwrap();
        assert_eq!(ea.mean(), a.mean());
        assert_eq!(ea.count(), a.count());

        let ab = a.merge(&b).unwrap();
        let ba = b.merge(&a).unwrap();
        assert!((ab.mean() - ba.mean()).abs() <= 1e-12 * ab.mean().abs().max(1.0));
        assert!((ab.variance() - ba.variance()).abs() <= 1e-12 * ab.variance());
        // Merge of disjoint halves equals single pass over the union.
        assert!((ab.mean() - single.mean()).abs() <= 1e-12 * single.mean().abs().max(1.0));
        assert!((ab.variance() - single.variance()).abs() <= 1e-12 * single.variance());
    }

    #[test]
    fn incompatible_merge_rejected() {
        let a = Accumulator::new(1);
        let b = Accumulator::new(2);
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn chunked_run_is_thread_count_invariant() {
        let run = || {
            run_chunked(estimator_label("demo"), 10_000, 500, 99, |s, len, acc| {
                for _ in 0..len {
                    let x = s.normal();
                    acc.push(x * x);
                }
            })
        };
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1.install(run);
        let r4 = pool4.install(run);
        assert_eq!(r1.mean.to_bits(), r4.mean.to_bits());
        assert_eq!(r1.stderr.map(f64::to_bits), r4.stderr.map(f64::to_bits));
        assert_eq!(r1.running_max.to_bits(), r4.running_max.to_bits());
    }

    #[test]
    fn power_fit_examples() {
        let exact: Vec<(f64, f64)> = (1..8)
            .map(|k| (k as f64, 5.0 * (k as f64).powi(3)))
            .collect();
        let fit = fit_power_law(&exact).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let constant: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 2.5)).collect();
        let fit = fit_power_law(&constant).unwrap();
        assert!(fit.exponent.abs() < 1e-9);

        // 1% multiplicative noise leaves the exponent within 0.1 of 2.
        let mut s = derive_stream(17, 0);
        let noisy: Vec<(f64, f64)> = (1..20)
            .map(|k| {
                let x = k as f64;
                (x, x * x * (1.0 + 0.01 * s.normal()))
            })
            .collect();
        let fit = fit_power_law(&noisy).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.1);

        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 4.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -4.0), (3.0, 9.0)]).is_err());
    }
}
