//! Monte Carlo estimation of mass-cutoff partition functions and related
//! probabilities.
//!
//! The estimated quantity is E_μ[ 1_{|wick mass| ≤ K} · exp((r/p) ‖u_N‖_p^p) ]
//! over the truncated free field. Heavy tails are a feature of the problem,
//! not a bug of the estimator: the mean, standard error, and the largest
//! single-sample integrand are always reported together, and for p at or above
//! the critical exponent a finite-sample mean is only a diagnostic.

use crate::basis::EigenBasis;
use crate::batch::BatchSynth;
use crate::error::{Error, Result};
use crate::field::{pow_abs, sigma_integral};
use crate::geometry::Geometry;
use crate::mc::{self, McEstimate};
use ndarray::s;
use serde::{Deserialize, Serialize};

/// Parameters of a truncated cutoff measure.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub geometry: Geometry,
    /// Nonlinearity exponent p > 2 (and p < 2d/(d−2) for d ≥ 3).
    pub p: f64,
    /// Wick-mass cutoff K > 0.
    pub cutoff: f64,
    /// Mode truncation N.
    pub n_cut: usize,
    /// Density power r ≥ 0 (r = 1 is the partition function itself).
    pub density_power: f64,
}

impl GibbsSpec {
    pub fn new(geometry: Geometry, p: f64, cutoff: f64, n_cut: usize) -> Result<Self> {
        let spec = GibbsSpec {
            geometry,
            p,
            cutoff,
            n_cut,
            density_power: 1.0,
        };
        let violations = spec.violations();
        if violations.is_empty() {
            Ok(spec)
        } else {
            Err(Error::Domain(violations.join("; ")))
        }
    }

    pub fn with_density_power(mut self, r: f64) -> Self {
        self.density_power = r;
        self
    }

    /// Every violated constraint, for machine-readable config rejection.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.p > 2.0) {
            v.push(format!("p must exceed 2, got {}", self.p));
        }
        if self.geometry.dim() >= 3 {
            let d = self.geometry.dim() as f64;
            let limit = 2.0 * d / (d - 2.0);
            if self.p >= limit {
                v.push(format!(
                    "d = {} requires p < 2d/(d-2) = {limit}, got {}",
                    self.geometry.dim(),
                    self.p
                ));
            }
        }
        if !(self.cutoff > 0.0) {
            v.push(format!("cutoff K must be positive, got {}", self.cutoff));
        }
        if !(self.density_power >= 0.0) {
            v.push(format!(
                "density power r must be nonnegative, got {}",
                self.density_power
            ));
        }
        v
    }

    /// Whether p lies at or above the critical exponent 2 + 4/d, where the
    /// partition function is not uniformly normalizable.
    pub fn is_supercritical(&self) -> bool {
        self.p >= self.geometry.critical_exponent()
    }
}

/// Where the cutoff indicator sits relative to the exponential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatorMode {
    /// 1_{|wick| ≤ K} · exp(R_p)  (the partition function itself).
    Outside,
    /// exp(R_p · 1_{|wick| ≤ K})  (the variant used for lower-bound chains).
    Inside,
}

enum ValueKind {
    Exponential(IndicatorMode),
    /// R_p · 1_{|wick| ≤ K} — the linear gain used for null-drift consistency.
    Gain,
}

/// MC estimate of the partition function Z_{K,N}.
pub fn estimate_partition(
    spec: &GibbsSpec,
    basis: &EigenBasis,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    estimate_partition_with_mode(spec, basis, IndicatorMode::Outside, samples, seed)
}

/// Partition estimate with an explicit indicator placement.
pub fn estimate_partition_with_mode(
    spec: &GibbsSpec,
    basis: &EigenBasis,
    mode: IndicatorMode,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    run_partition_sampler(spec, basis, ValueKind::Exponential(mode), samples, seed)
}

/// MC estimate of the L^{r_power}(μ) mass of the density: the same integrand
/// with r replaced by `r_power`.
pub fn density_moment(
    spec: &GibbsSpec,
    basis: &EigenBasis,
    r_power: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let spec = spec.with_density_power(r_power);
    estimate_partition(&spec, basis, samples, seed)
}

/// MC estimate of E[R_p(u_N) · 1_{|wick| ≤ K}] — the zero-drift value of the
/// variational objective's gain term.
pub fn indicator_gain(
    spec: &GibbsSpec,
    basis: &EigenBasis,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    run_partition_sampler(spec, basis, ValueKind::Gain, samples, seed)
}

fn run_partition_sampler(
    spec: &GibbsSpec,
    basis: &EigenBasis,
    kind: ValueKind,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let violations = spec.violations();
    if !violations.is_empty() {
        return Err(Error::Domain(violations.join("; ")));
    }
    if spec.n_cut > basis.n_max() {
        return Err(Error::Shape(format!(
            "spec.n_cut = {} exceeds basis n_max = {}",
            spec.n_cut,
            basis.n_max()
        )));
    }
    let label = mc::estimator_label(&format!(
        "partition d={} radial={} p={} K={} N={} r={} kind={}",
        spec.geometry.dim(),
        spec.geometry.is_radial(),
        spec.p,
        spec.cutoff,
        spec.n_cut,
        spec.density_power,
        match kind {
            ValueKind::Exponential(IndicatorMode::Outside) => "out",
            ValueKind::Exponential(IndicatorMode::Inside) => "in",
            ValueKind::Gain => "gain",
        },
    ));
    let n = spec.n_cut;
    let rate = spec.density_power / spec.p;
    let sigma = sigma_integral(&spec.geometry, n);
    let lambdas: Vec<f64> = (0..=n).map(|k| spec.geometry.eigenvalue(k)).collect();
    let values = basis.values();
    let mode_values = values.slice(s![0..=n, ..]);
    let grid = basis.grid();

    Ok(mc::run_chunked(
        label,
        samples,
        mc::DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            let mut batch = BatchSynth::new(n + 1, grid.len());
            let cap = batch.capacity();
            // Per-record bookkeeping: Some(row) if the sample needs synthesis.
            let mut pending: Vec<Option<usize>> = Vec::with_capacity(cap);
            let mut indicators: Vec<bool> = Vec::with_capacity(cap);
            let mut done = 0usize;
            while done < len {
                let block = cap.min(len - done);
                pending.clear();
                indicators.clear();
                let mut active = 0usize;
                for i in 0..block {
                    let row = batch.coeff_row_slice_mut(active);
                    let mut mass = 0.0;
                    for (k, lam) in lambdas.iter().enumerate() {
                        let g = stream.normal();
                        let u = g / lam;
                        row[k] = u;
                        mass += u * u;
                    }
                    let wick = mass - sigma;
                    let pass = wick.abs() <= spec.cutoff;
                    indicators.push(pass);
                    // Synthesis is only needed when the sample contributes a
                    // nonconstant value.
                    let needs_synth = pass && rate > 0.0;
                    if needs_synth {
                        pending.push(Some(active));
                        active += 1;
                    } else {
                        pending.push(None);
                    }
                    let _ = i;
                }
                let fields = batch_fields(&mut batch, &mode_values, active);
                for (i, slot) in pending.iter().enumerate() {
                    let value = match slot {
                        Some(row) => {
                            let u = fields.slice(s![*row, ..]);
                            let u = u.as_slice().expect("contiguous row");
                            let lp_p = grid.integrate_map(u, |v| pow_abs(v, spec.p));
                            match kind {
                                ValueKind::Exponential(_) => (rate * lp_p).exp(),
                                ValueKind::Gain => rate * lp_p,
                            }
                        }
                        None => match kind {
                            ValueKind::Exponential(IndicatorMode::Outside) => {
                                if indicators[i] {
                                    1.0 // r = 0: integrand reduces to the indicator
                                } else {
                                    0.0
                                }
                            }
                            ValueKind::Exponential(IndicatorMode::Inside) => 1.0,
                            ValueKind::Gain => 0.0,
                        },
                    };
                    acc.push(value);
                }
                done += block;
            }
        },
    ))
}

// Borrow helper: the batch cannot be borrowed mutably while the view is alive
// inside the same expression.
fn batch_fields<'a>(
    batch: &'a mut BatchSynth,
    mode_values: &ndarray::ArrayView2<'_, f64>,
    active: usize,
) -> ndarray::ArrayView2<'a, f64> {
    batch.synthesize(mode_values, active)
}

/// One-dimensional quadrature oracle for the N = 0 partition function.
///
/// At N = 0 the field is u_0 h_0 with u_0 = g/λ_0 for a standard real
/// Gaussian g, so with t = g² (chi-square with one degree of freedom),
/// Z = ∫ 1_{|t−1| ≤ K λ_0²} exp((r/p) t^{p/2} ‖h_0‖_p^p / λ_0^p) dχ²₁(t),
/// evaluated to absolute accuracy 1e-8.
pub fn exact_partition_n0(spec: &GibbsSpec, basis: &EigenBasis) -> Result<f64> {
    if spec.n_cut != 0 {
        return Err(Error::Contract(format!(
            "quadrature oracle only covers N = 0, got N = {}",
            spec.n_cut
        )));
    }
    let lam0 = spec.geometry.eigenvalue(0);
    let lam0_sq = spec.geometry.eigenvalue_sq(0);
    let h0_lp = basis.eigen_lp_norm(0, spec.p)?;
    let c = spec.density_power / spec.p * h0_lp.powf(spec.p) / lam0.powf(spec.p);
    let t_lo = (1.0 - spec.cutoff * lam0_sq).max(0.0);
    let t_hi = 1.0 + spec.cutoff * lam0_sq;
    // Substitute t = s²: dχ²₁(t) = 2 φ(s) ds on s ≥ 0.
    let s_lo = t_lo.sqrt();
    let s_hi = t_hi.sqrt();
    let norm = (2.0 / std::f64::consts::PI).sqrt();
    let p = spec.p;
    let integrand = move |s: f64| norm * (c * pow_abs(s, p) - 0.5 * s * s).exp();
    crate::special::adaptive_simpson(&integrand, s_lo, s_hi, 1e-9)
}

/// MC estimate of P(wick mass ∈ [K − eps, K + eps]) at truncation N.
pub fn boundary_probability(
    geometry: Geometry,
    n_cut: usize,
    cutoff: f64,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let label = mc::estimator_label(&format!(
        "boundary d={} radial={} N={n_cut} K={cutoff} eps={eps}",
        geometry.dim(),
        geometry.is_radial(),
    ));
    let sigma = sigma_integral(&geometry, n_cut);
    let lambdas: Vec<f64> = (0..=n_cut).map(|k| geometry.eigenvalue(k)).collect();
    Ok(mc::run_chunked(
        label,
        samples,
        mc::DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            for _ in 0..len {
                let mut mass = 0.0;
                for lam in &lambdas {
                    let g = stream.normal();
                    let u = g / lam;
                    mass += u * u;
                }
                let wick = mass - sigma;
                let hit = wick >= cutoff - eps && wick <= cutoff + eps;
                acc.push(if hit { 1.0 } else { 0.0 });
            }
        },
    ))
}

/// MC estimate of the tail-set probability
/// P(|tail wick mass| ≤ K/2 and (1/p)‖u_tail‖_p^p ≤ 1), where the tail runs
/// over modes N < n ≤ tail_cut as a stand-in for the infinite tail.
///
/// The report includes the neglected variance Σ_{n > tail_cut} 2 λ_n^{-4} via
/// [`tail_neglected_variance`].
pub fn tail_set_probability(
    geometry: Geometry,
    n_cut: usize,
    cutoff: f64,
    p: f64,
    tail_cut: usize,
    basis: &EigenBasis,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if tail_cut <= n_cut {
        return Err(Error::Domain(format!(
            "tail_cut = {tail_cut} must exceed N = {n_cut}"
        )));
    }
    if tail_cut > basis.n_max() {
        return Err(Error::Shape(format!(
            "tail_cut = {tail_cut} exceeds basis n_max = {}",
            basis.n_max()
        )));
    }
    let label = mc::estimator_label(&format!(
        "tailset d={} radial={} N={n_cut} tail={tail_cut} K={cutoff} p={p}",
        geometry.dim(),
        geometry.is_radial(),
    ));
    let lambdas: Vec<f64> = (n_cut + 1..=tail_cut)
        .map(|k| geometry.eigenvalue(k))
        .collect();
    let n_tail = lambdas.len();
    let values = basis.values();
    let tail_values = values.slice(s![n_cut + 1..=tail_cut, ..]);
    let grid = basis.grid();
    let half_k = 0.5 * cutoff;
    Ok(mc::run_chunked(
        label,
        samples,
        mc::DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            let mut batch = BatchSynth::new(n_tail, grid.len());
            let cap = batch.capacity();
            let mut pending: Vec<Option<usize>> = Vec::with_capacity(cap);
            let mut done = 0usize;
            while done < len {
                let block = cap.min(len - done);
                pending.clear();
                let mut active = 0usize;
                for _ in 0..block {
                    let row = batch.coeff_row_slice_mut(active);
                    let mut wick = 0.0;
                    for (k, lam) in lambdas.iter().enumerate() {
                        let g = stream.normal();
                        row[k] = g / lam;
                        wick += (g * g - 1.0) / (lam * lam);
                    }
                    if wick.abs() <= half_k {
                        pending.push(Some(active));
                        active += 1;
                    } else {
                        pending.push(None);
                    }
                }
                let fields = batch_fields(&mut batch, &tail_values, active);
                for slot in &pending {
                    let value = match slot {
                        Some(row) => {
                            let u = fields.slice(s![*row, ..]);
                            let u = u.as_slice().expect("contiguous row");
                            let lp_p = grid.integrate_map(u, |v| pow_abs(v, p));
                            if lp_p / p <= 1.0 {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        None => 0.0,
                    };
                    acc.push(value);
                }
                done += block;
            }
        },
    ))
}

/// Σ_{n > tail_cut} 2 λ_n^{-4}: the Wick-mass variance neglected by cutting
/// the tail at `tail_cut` (closed-form bound via the integral comparison).
pub fn tail_neglected_variance(geometry: &Geometry, tail_cut: usize) -> f64 {
    // Σ_{n > T} 2/λ_n⁴ ≤ ∫_T^∞ 2 dν/(aν + b)² = 2/(a (aT + b)) with
    // λ_n² = a n + b.
    let (a, b) = if geometry.dim() == 1 {
        (2.0, 1.0)
    } else {
        (4.0, geometry.dim() as f64)
    };
    2.0 / (a * (a * tail_cut as f64 + b))
}
