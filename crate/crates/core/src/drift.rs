//! Explicit drift construction for the variational bound.
//!
//! The drift plants an amplified profile while cancelling the filtered field:
//! Θ⁰ = −Z_M + √α P_{≤N} f_M, with the amplitude α chosen so that the planted
//! L² mass exactly offsets the expected Wick-mass shift. The shifted field
//! Y_N + Θ⁰ then keeps its Wick mass inside any cutoff window with probability
//! → 1 as M grows, while its L^p mass grows like α^{p/2} M^{pd/2−d}. The
//! variational objective E[−R_p(Y+Θ⁰)·1] + ½ E∫‖θ⁰‖² is an upper bound on
//! −log E_μ[exp(R_p·1)]: it stays bounded below in the normalizable regime and
//! is driven to −∞ (in M) at and above the critical exponent.

use crate::basis::EigenBasis;
use crate::batch::BatchSynth;
use crate::error::{Error, Result};
use crate::field::pow_abs;
use crate::geometry::Geometry;
use crate::mc::{self, McEstimate};
use crate::ou::{ou_coupling, OuCoupling};
use crate::profile::{
    capture_n, profile_norms, project_profile_modes, AnnularBump, ProfileSpectrum,
};
use ndarray::s;
use serde::Serialize;

/// Minimum captured profile mass below which the amplitude is meaningless:
/// the standing requirement is N large enough that ‖P_{≤N} f_M‖² ≳ 1.
pub const CAPTURE_FLOOR: f64 = 0.5;

/// The planted amplitude α_{M,N} = E[2Re⟨Y_N, Z_M⟩ − ‖Z_M‖²] / ‖P_{≤N} f_M‖².
pub fn alpha(coupling: &OuCoupling, spectrum: &ProfileSpectrum) -> Result<f64> {
    let captured = spectrum.captured_mass(coupling.n_cut());
    if captured < CAPTURE_FLOOR {
        return Err(Error::Resolution(format!(
            "degenerate projection: ‖P_N f_M‖² = {captured:.3e} < {CAPTURE_FLOOR} at M = {}, N = {} \
             (λ_N must exceed the profile frequency M; N ~ M²/2 is required on the line)",
            spectrum.m,
            coupling.n_cut()
        )));
    }
    Ok(coupling.amplitude_numerator() / captured)
}

/// The two parts of the drift energy E ∫₀¹ ‖θ⁰(t)‖²_{L²} dt.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DriftCost {
    /// E ∫ ‖Ż_M‖²_{H¹} — the filter part, ≲ M.
    pub filter_energy: f64,
    /// α ‖P_{≤N} f_M‖²_{H¹} — the planted part, ~ M² log M.
    pub profile_energy: f64,
}

impl DriftCost {
    pub fn total(&self) -> f64 {
        self.filter_energy + self.profile_energy
    }
}

/// Closed-form drift energy for amplitude `alpha_val`.
pub fn drift_cost(coupling: &OuCoupling, spectrum: &ProfileSpectrum, alpha_val: f64) -> DriftCost {
    DriftCost {
        filter_energy: coupling.filter_drift_energy(),
        profile_energy: alpha_val * spectrum.h1_mass(coupling.geometry(), coupling.n_cut()),
    }
}

/// (E|⟨Y_N, f_M⟩|², E|⟨Z_M, f_M⟩|²) in closed form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairingVariance {
    pub field: f64,
    pub filter: f64,
}

pub fn pairing_variance(coupling: &OuCoupling, spectrum: &ProfileSpectrum) -> PairingVariance {
    let geometry = coupling.geometry();
    let field = spectrum.inverse_h1_mass(geometry, coupling.n_cut());
    let filter = spectrum.coeffs[..=coupling.filter_scale().min(spectrum.n_hi())]
        .iter()
        .enumerate()
        .map(|(n, c)| coupling.var_z(n) * c * c)
        .sum();
    PairingVariance { field, filter }
}

/// A fully assembled drift: coupling, planted profile, amplitude, and cost.
pub struct DriftPlan {
    geometry: Geometry,
    n_cut: usize,
    cutoff: f64,
    coupling: Option<OuCoupling>,
    alpha: f64,
    /// √α ⟨f_M, h_n⟩ for n ≤ N (all zeros for the null plan).
    theta_profile: Vec<f64>,
    cost: DriftCost,
}

impl DriftPlan {
    /// Build the plan for a coupling and profile spectrum; fails when the
    /// projection is degenerate.
    pub fn build(
        coupling: OuCoupling,
        spectrum: &ProfileSpectrum,
        cutoff: f64,
    ) -> Result<DriftPlan> {
        if !(cutoff > 0.0) {
            return Err(Error::Domain("cutoff K must be positive".into()));
        }
        let a = alpha(&coupling, spectrum)?;
        let sqrt_a = a.sqrt();
        let n_cut = coupling.n_cut();
        let mut theta_profile = vec![0.0; n_cut + 1];
        for (n, t) in theta_profile.iter_mut().enumerate() {
            if n <= spectrum.n_hi() {
                *t = sqrt_a * spectrum.coeffs[n];
            }
        }
        let cost = drift_cost(&coupling, spectrum, a);
        Ok(DriftPlan {
            geometry: *coupling.geometry(),
            n_cut,
            cutoff,
            coupling: Some(coupling),
            alpha: a,
            theta_profile,
            cost,
        })
    }

    /// The zero drift: the objective reduces to −E[R_p(Y_N)·1].
    pub fn null(geometry: Geometry, n_cut: usize, cutoff: f64) -> DriftPlan {
        DriftPlan {
            geometry,
            n_cut,
            cutoff,
            coupling: None,
            alpha: 0.0,
            theta_profile: vec![0.0; n_cut + 1],
            cost: DriftCost {
                filter_energy: 0.0,
                profile_energy: 0.0,
            },
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cost(&self) -> &DriftCost {
        &self.cost
    }

    /// ½ E ∫₀¹ ‖θ⁰(t)‖²_{L²} dt — the cost term entering the objective.
    pub fn expected_cost(&self) -> f64 {
        0.5 * self.cost.total()
    }

    /// E ‖Θ⁰‖²_{H¹}; the drift energy inequality bounds this by 2·expected_cost.
    pub fn expected_h1_sq(&self) -> f64 {
        let planted: f64 = self
            .theta_profile
            .iter()
            .enumerate()
            .map(|(n, t)| self.geometry.eigenvalue_sq(n) * t * t)
            .sum();
        let filtered: f64 = match &self.coupling {
            Some(c) => (0..=c.filter_scale())
                .map(|n| self.geometry.eigenvalue_sq(n) * c.var_z(n))
                .sum(),
            None => 0.0,
        };
        planted + filtered
    }

    /// Draw the shifted field v = Y_N + Θ⁰_N in coefficient space.
    fn sample_shifted_into(
        &self,
        stream: &mut crate::mc::RngStream,
        y: &mut [f64],
        z: &mut [f64],
        v: &mut [f64],
    ) {
        match &self.coupling {
            Some(c) => {
                c.sample_joint_into(stream, y, z);
                for n in 0..=self.n_cut {
                    v[n] = y[n] - z[n] + self.theta_profile[n];
                }
            }
            None => {
                for n in 0..=self.n_cut {
                    y[n] = stream.normal() / self.geometry.eigenvalue(n);
                    v[n] = y[n];
                }
            }
        }
    }
}

/// MC estimate of P(|wick mass of Y_N + Θ⁰_N| ≤ K), all terms in coefficient
/// space.
pub fn key_probability(plan: &DriftPlan, samples: u64, seed: u64) -> McEstimate {
    let label = mc::estimator_label(&format!(
        "key d={} radial={} M={:?} N={} K={} alpha={}",
        plan.geometry.dim(),
        plan.geometry.is_radial(),
        plan.coupling.as_ref().map(|c| c.filter_scale()),
        plan.n_cut,
        plan.cutoff,
        plan.alpha,
    ));
    let sigma = crate::field::sigma_integral(&plan.geometry, plan.n_cut);
    let n = plan.n_cut;
    mc::run_chunked(
        label,
        samples,
        mc::DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            let mut y = vec![0.0; n + 1];
            let mut z = vec![0.0; n + 1];
            let mut v = vec![0.0; n + 1];
            for _ in 0..len {
                plan.sample_shifted_into(stream, &mut y, &mut z, &mut v);
                let mass: f64 = v.iter().map(|&a| a * a).sum();
                let w = mass - sigma;
                acc.push(if w.abs() <= plan.cutoff { 1.0 } else { 0.0 });
            }
        },
    )
}

/// Result of the variational objective estimate at one (p, plan).
#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveReport {
    /// MC estimate of the gain term E[R_p(Y+Θ⁰)·1_{|wick|≤K}] (≥ 0).
    pub gain: McEstimate,
    pub cost: DriftCost,
    /// ½ E∫‖θ⁰‖².
    pub expected_cost: f64,
    /// objective = expected_cost − gain.mean (upper bound on −log Z variant).
    pub objective_mean: f64,
    pub objective_stderr: Option<f64>,
    pub alpha: f64,
}

impl ObjectiveReport {
    /// The objective as an estimate record.
    pub fn objective_estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.objective_mean,
            stderr: self.objective_stderr,
            n_samples: self.gain.n_samples,
            seed: self.gain.seed,
            chunks: self.gain.chunks,
            chunk_size: self.gain.chunk_size,
            running_max: self.gain.running_max,
        }
    }
}

/// MC estimate of the variational objective
/// E[−(1/p)‖Y_N + Θ⁰_N‖_p^p · 1_{|shifted wick mass| ≤ K}] + ½ E∫‖θ⁰‖².
pub fn variational_objective(
    p: f64,
    plan: &DriftPlan,
    basis: &EigenBasis,
    samples: u64,
    seed: u64,
) -> Result<ObjectiveReport> {
    if !plan.geometry.admissible_p(p) {
        return Err(Error::Domain(format!(
            "p = {p} not admissible in dimension {}",
            plan.geometry.dim()
        )));
    }
    if plan.n_cut > basis.n_max() {
        return Err(Error::Shape(format!(
            "plan n_cut = {} exceeds basis n_max = {}",
            plan.n_cut,
            basis.n_max()
        )));
    }
    let label = mc::estimator_label(&format!(
        "objective d={} radial={} p={p} M={:?} N={} K={} alpha={}",
        plan.geometry.dim(),
        plan.geometry.is_radial(),
        plan.coupling.as_ref().map(|c| c.filter_scale()),
        plan.n_cut,
        plan.cutoff,
        plan.alpha,
    ));
    let sigma = crate::field::sigma_integral(&plan.geometry, plan.n_cut);
    let n = plan.n_cut;
    let grid = basis.grid();
    let values = basis.values();
    let mode_values = values.slice(s![0..=n, ..]);

    let gain = mc::run_chunked(
        label,
        samples,
        mc::DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            let mut batch = BatchSynth::new(n + 1, grid.len());
            let cap = batch.capacity();
            let mut y = vec![0.0; n + 1];
            let mut z = vec![0.0; n + 1];
            let mut v = vec![0.0; n + 1];
            let mut pending: Vec<Option<usize>> = Vec::with_capacity(cap);
            let mut done = 0usize;
            while done < len {
                let block = cap.min(len - done);
                pending.clear();
                let mut active = 0usize;
                for _ in 0..block {
                    plan.sample_shifted_into(stream, &mut y, &mut z, &mut v);
                    let mass: f64 = v.iter().map(|&a| a * a).sum();
                    let w = mass - sigma;
                    if w.abs() <= plan.cutoff {
                        batch.coeff_row_slice_mut(active).copy_from_slice(&v);
                        pending.push(Some(active));
                        active += 1;
                    } else {
                        pending.push(None);
                    }
                }
                let fields = {
                    let view = batch.synthesize(&mode_values, active);
                    view.to_owned()
                };
                for slot in &pending {
                    let value = match slot {
                        Some(row) => {
                            let u = fields.slice(s![*row, ..]);
                            let u = u.as_slice().expect("contiguous row");
                            grid.integrate_map(u, |a| pow_abs(a, p)) / p
                        }
                        None => 0.0,
                    };
                    acc.push(value);
                }
                done += block;
            }
        },
    );
    let expected_cost = plan.expected_cost();
    Ok(ObjectiveReport {
        objective_mean: expected_cost - gain.mean,
        objective_stderr: gain.stderr,
        gain,
        cost: *plan.cost(),
        expected_cost,
        alpha: plan.alpha(),
    })
}

/// An inclusive interval for a scaled diagnostic ratio.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RatioInterval {
    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && v >= self.lo && v <= self.hi
    }
}

/// Regression intervals for the filter diagnostics, pinned from reference
/// runs over M ∈ {16, 32, 64, 128, 256}, N = 8M, d = 1 (measured ranges sit
/// comfortably inside; the margins absorb grid changes, not regressions).
pub mod intervals {
    use super::RatioInterval;

    /// E‖Z_M‖² / log M (measured 0.36..0.41).
    pub const FILTER_MASS: RatioInterval = RatioInterval { lo: 0.30, hi: 0.50 };
    /// E[2Re⟨Y,Z⟩ − ‖Z‖²] / log M (measured 0.56..0.65).
    pub const AMPLITUDE_NUMERATOR: RatioInterval = RatioInterval { lo: 0.45, hi: 0.80 };
    /// E|:‖Y−Z‖²:|² · M / log M (measured 0.40..0.54).
    pub const CENTERED_SECOND_MOMENT: RatioInterval = RatioInterval { lo: 0.30, hi: 0.70 };
    /// (E|⟨Y,f⟩|² + E|⟨Z,f⟩|²) · M^{3/2} (measured 0.12..0.46).
    pub const PAIRING: RatioInterval = RatioInterval { lo: 0.06, hi: 0.70 };
    /// E∫‖Ż‖²_{H¹} / M (measured 0.45..0.48).
    pub const FILTER_DRIFT_ENERGY: RatioInterval = RatioInterval { lo: 0.35, hi: 0.60 };
    /// Total drift cost / (M² log M) (measured 0.32..0.38).
    pub const DRIFT_COST: RatioInterval = RatioInterval { lo: 0.24, hi: 0.50 };
    /// α / log M (measured 0.56..0.65).
    pub const ALPHA: RatioInterval = RatioInterval { lo: 0.45, hi: 0.80 };
}

/// One row of the filtered-approximation diagnostic table. NRZ-style
/// quantities that do not involve the profile use the caller's truncation
/// `n_mass`; amplitude, pairing, and cost use the capture truncation
/// `n_profile` ≥ n_mass, since the projected profile is degenerate unless
/// λ_N exceeds M.
#[derive(Clone, Debug, Serialize)]
pub struct FilterDiagnostics {
    pub m: usize,
    pub n_mass: usize,
    pub n_profile: usize,
    /// E‖Z_M‖² (~ log M).
    pub filter_mass: f64,
    /// E[2Re⟨Y,Z⟩ − ‖Z‖²] (~ log M).
    pub amplitude_numerator: f64,
    /// E|:‖Y−Z‖²:|² (≲ M^{-1} log M).
    pub centered_second_moment: f64,
    /// E|⟨Y_N, f_M⟩|² (≲ M^{-2}).
    pub pairing_field: f64,
    /// E|⟨Z_M, f_M⟩|² (exponentially small: f̂ has no mass below λ_M).
    pub pairing_filter: f64,
    /// E∫‖Ż_M‖²_{H¹} (≲ M).
    pub filter_drift_energy: f64,
    pub alpha: f64,
    pub capture: f64,
    pub cost_filter: f64,
    pub cost_profile: f64,
}

impl FilterDiagnostics {
    /// The scaled ratios against their pinned intervals; returns one message
    /// per violated interval.
    pub fn interval_violations(&self) -> Vec<String> {
        let m = self.m as f64;
        let logm = m.ln();
        let checks: [(&str, f64, RatioInterval); 7] = [
            (
                "filter_mass/logM",
                self.filter_mass / logm,
                intervals::FILTER_MASS,
            ),
            (
                "amplitude_numerator/logM",
                self.amplitude_numerator / logm,
                intervals::AMPLITUDE_NUMERATOR,
            ),
            (
                "centered_second_moment*M/logM",
                self.centered_second_moment * m / logm,
                intervals::CENTERED_SECOND_MOMENT,
            ),
            (
                "pairing*M^1.5",
                (self.pairing_field + self.pairing_filter) * m.powf(1.5),
                intervals::PAIRING,
            ),
            (
                "filter_drift_energy/M",
                self.filter_drift_energy / m,
                intervals::FILTER_DRIFT_ENERGY,
            ),
            (
                "cost/(M^2 logM)",
                (self.cost_filter + self.cost_profile) / (m * m * logm),
                intervals::DRIFT_COST,
            ),
            ("alpha/logM", self.alpha / logm, intervals::ALPHA),
        ];
        checks
            .iter()
            .filter(|(_, v, iv)| !iv.contains(*v))
            .map(|(name, v, iv)| {
                format!(
                    "M={}: {name} = {v:.4} outside [{}, {}]",
                    self.m, iv.lo, iv.hi
                )
            })
            .collect()
    }
}

/// Closed-form diagnostics for a grid of filter scales.
pub fn filter_diagnostics(
    bump: &AnnularBump,
    m_grid: &[usize],
    n_factor: usize,
) -> Result<Vec<FilterDiagnostics>> {
    let geometry = *bump.geometry();
    m_grid
        .iter()
        .map(|&m| {
            let n_mass = n_factor.max(1) * m;
            let n_profile = n_mass.max(capture_n(&geometry, m as f64));
            let coupling_mass = ou_coupling(geometry, m, n_mass)?;
            let coupling_prof = ou_coupling(geometry, m, n_profile)?;
            let spectrum = project_profile_modes(bump, m as f64, n_profile)?;
            let a = alpha(&coupling_prof, &spectrum)?;
            let pv = pairing_variance(&coupling_prof, &spectrum);
            let cost = drift_cost(&coupling_prof, &spectrum, a);
            Ok(FilterDiagnostics {
                m,
                n_mass,
                n_profile,
                filter_mass: coupling_mass.filter_mass_expectation(),
                amplitude_numerator: coupling_mass.amplitude_numerator(),
                centered_second_moment: coupling_mass.centered_residual_second_moment(),
                pairing_field: pv.field,
                pairing_filter: pv.filter,
                filter_drift_energy: coupling_mass.filter_drift_energy(),
                alpha: a,
                capture: spectrum.captured_mass(coupling_prof.n_cut()),
                cost_filter: cost.filter_energy,
                cost_profile: cost.profile_energy,
            })
        })
        .collect()
}

/// One row of the divergence scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub cutoff: f64,
    pub m: usize,
    pub n_cut: usize,
    pub objective_mean: f64,
    pub objective_stderr: Option<f64>,
    pub gain_mean: f64,
    pub gain_stderr: Option<f64>,
    pub cost: f64,
    pub key_prob: f64,
    pub key_prob_stderr: Option<f64>,
    pub alpha: f64,
    pub capture: f64,
    /// (1/p) ‖f_M‖_{L^p}^p — the amplitude-free gain scale, ~ M^{pd/2−d}.
    pub profile_gain_scale: f64,
}

/// Scan summary: per-p fitted exponents.
#[derive(Clone, Debug, Serialize)]
pub struct ScanFit {
    pub p: f64,
    /// Exponent of the amplitude-free gain scale vs M (expect pd/2 − d).
    pub gain_exponent: f64,
    /// Exponent of the total drift cost vs M (expect ~2, log-corrected).
    pub cost_exponent: f64,
    /// Exponent of −objective vs M over rows with negative objective, if at
    /// least three such rows exist.
    pub divergence_exponent: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub fits: Vec<ScanFit>,
}

/// Run the variational objective across (p, M) pairs.
///
/// Each M uses the capture truncation N(M) (smallest N with λ_N ≳ M) so the
/// planted profile is actually representable; the basis is rebuilt per
/// distinct N at the given accuracy.
pub fn divergence_scan(
    geometry: Geometry,
    p_list: &[f64],
    cutoff: f64,
    m_grid: &[usize],
    samples: u64,
    seed: u64,
    basis_accuracy: f64,
) -> Result<ScanReport> {
    let bump = AnnularBump::new(geometry)?;
    let mut rows = Vec::new();
    for &m in m_grid {
        let n_cut = capture_n(&geometry, m as f64).max(m);
        let basis = crate::basis::build_basis(geometry, n_cut, basis_accuracy)?;
        let spectrum = project_profile_modes(&bump, m as f64, n_cut)?;
        let coupling = ou_coupling(geometry, m, n_cut)?;
        let plan = DriftPlan::build(coupling, &spectrum, cutoff)?;
        let key = key_probability(&plan, samples, seed ^ 0x6b65);
        for &p in p_list {
            let report = variational_objective(p, &plan, &basis, samples, seed)?;
            let norms = profile_norms(&bump, m as f64, &[p])?;
            rows.push(ScanRow {
                p,
                cutoff,
                m,
                n_cut,
                objective_mean: report.objective_mean,
                objective_stderr: report.objective_stderr,
                gain_mean: report.gain.mean,
                gain_stderr: report.gain.stderr,
                cost: report.cost.total(),
                key_prob: key.mean,
                key_prob_stderr: key.stderr,
                alpha: report.alpha,
                capture: spectrum.captured_mass(n_cut),
                profile_gain_scale: norms.lp_pow[0].1 / p,
            });
        }
    }
    let fits = p_list
        .iter()
        .map(|&p| {
            let per_p: Vec<&ScanRow> = rows.iter().filter(|r| r.p == p).collect();
            let gain_pts: Vec<(f64, f64)> = per_p
                .iter()
                .map(|r| (r.m as f64, r.profile_gain_scale))
                .collect();
            let cost_pts: Vec<(f64, f64)> = per_p.iter().map(|r| (r.m as f64, r.cost)).collect();
            let div_pts: Vec<(f64, f64)> = per_p
                .iter()
                .filter(|r| r.objective_mean < 0.0)
                .map(|r| (r.m as f64, -r.objective_mean))
                .collect();
            ScanFit {
                p,
                gain_exponent: mc::fit_power_law(&gain_pts)
                    .map(|f| f.exponent)
                    .unwrap_or(f64::NAN),
                cost_exponent: mc::fit_power_law(&cost_pts)
                    .map(|f| f.exponent)
                    .unwrap_or(f64::NAN),
                divergence_exponent: mc::fit_power_law(&div_pts).ok().map(|f| f.exponent),
            }
        })
        .collect();
    Ok(ScanReport { rows, fits })
}
