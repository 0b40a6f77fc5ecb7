//! Concentrated bump profiles with annular frequency support.
//!
//! The base profile f is the (unitary) inverse Fourier transform of a fixed
//! smooth radial bump supported on 1/2 < |ξ| ≤ 1, normalized to ‖f‖_{L²} = 1.
//! Rescaling f_M(x) = M^{d/2} f(Mx) keeps the L² norm while pushing the
//! frequency support to the annulus M/2 < |ξ| ≤ M, so the L^p mass grows like
//! M^{pd/2 − d} and the H¹ norm like M. Radial geometries use the Hankel
//! transform of order d/2 − 1, which is the same unitary transform restricted
//! to radial functions.

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::grid::Grid;
use crate::recurrence::{self, mode_cap};
use crate::special::bessel_j;
use rayon::prelude::*;
use serde::Serialize;

/// Nodes of the fixed midpoint rule on the bump support [1/2, 1]. The bump
/// vanishes to all orders at both endpoints, so the rule is spectrally
/// accurate; 8192 nodes keep the oscillatory kernels alias-free out to
/// |y| ~ 5·10⁴.
const BUMP_NODES: usize = 8192;

/// |f(y)| is below ~1e-12 beyond this radius (the transform of a Gevrey bump
/// decays like exp(-c√|y|)); the profile is treated as zero outside.
pub const PROFILE_SUPPORT_RADIUS: f64 = 2000.0;

/// Norm integrals truncate here: |f(y)| < 4e-8 beyond, so the neglected L²
/// and L^p mass is below 1e-8 in every dimension handled.
const NORM_RADIUS: f64 = 400.0;

/// Relative frequency margin used when matching a mode truncation to a
/// profile scale: capture needs λ_N ≥ (1 + margin) · M.
const CAPTURE_MARGIN: f64 = 1.05;

/// Smallest truncation N whose spectral band reaches past the profile scale
/// M, i.e. λ_N ≥ 1.05 M. Note λ_N ~ √(2N) on the line (√(4N) radially), so
/// this is N ~ M²/2, far larger than M itself.
pub fn capture_n(geometry: &Geometry, m: f64) -> usize {
    let target = (CAPTURE_MARGIN * m).powi(2);
    let n = if geometry.dim() == 1 {
        ((target - 1.0) / 2.0).ceil()
    } else {
        ((target - geometry.dim() as f64) / 4.0).ceil()
    };
    (n.max(1.0)) as usize
}

/// The fixed annular bump χ(ξ) = exp(−1/(1−s²)) with s = 4|ξ| − 3, tabulated
/// on its support and L²-normalized for the geometry's transform.
pub struct AnnularBump {
    geometry: Geometry,
    /// Midpoint nodes ρ_i in (1/2, 1).
    rho: Vec<f64>,
    /// χ̃(ρ_i) · Δρ, normalization included.
    weighted: Vec<f64>,
}

fn chi(xi: f64) -> f64 {
    let s = 4.0 * xi - 3.0;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl AnnularBump {
    pub fn new(geometry: Geometry) -> Result<Self> {
        if geometry.dim() > 3 {
            return Err(Error::Capability(format!(
                "profiles are implemented for d ≤ 3, got d = {}",
                geometry.dim()
            )));
        }
        let h = 0.5 / BUMP_NODES as f64;
        let rho: Vec<f64> = (0..BUMP_NODES)
            .map(|i| 0.5 + (i as f64 + 0.5) * h)
            .collect();
        let raw: Vec<f64> = rho.iter().map(|&r| chi(r)).collect();
        // ‖f‖_{L²}² = |S^{d-1}| ∫ χ̃² ρ^{d-1} dρ = 1 fixes the normalization.
        let dm1 = (geometry.dim() - 1) as i32;
        let mass: f64 = rho
            .iter()
            .zip(&raw)
            .map(|(&r, &c)| c * c * r.powi(dm1) * h)
            .sum();
        let norm = (geometry.sphere_area() * mass).sqrt().recip();
        let weighted = raw.iter().map(|&c| c * norm * h).collect();
        Ok(AnnularBump {
            geometry,
            rho,
            weighted,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// The base profile f at radius y (scale M = 1).
    pub fn eval(&self, y: f64) -> f64 {
        let y = y.abs();
        if y > PROFILE_SUPPORT_RADIUS {
            return 0.0;
        }
        match self.geometry.dim() {
            1 => {
                let c = (2.0 / std::f64::consts::PI).sqrt();
                self.rho
                    .iter()
                    .zip(&self.weighted)
                    .map(|(&r, &w)| w * (y * r).cos())
                    .sum::<f64>()
                    * c
            }
            2 => self
                .rho
                .iter()
                .zip(&self.weighted)
                .map(|(&r, &w)| w * bessel_j(0, y * r) * r)
                .sum(),
            3 => {
                let c = (2.0 / std::f64::consts::PI).sqrt();
                self.rho
                    .iter()
                    .zip(&self.weighted)
                    .map(|(&r, &w)| w * r * r * sinc(y * r))
                    .sum::<f64>()
                    * c
            }
            _ => unreachable!("checked in new()"),
        }
    }

    /// f_M(x) = M^{d/2} f(Mx).
    pub fn eval_scaled(&self, m: f64, x: f64) -> f64 {
        let d = self.geometry.dim() as f64;
        m.powf(0.5 * d) * self.eval(m * x)
    }

    /// ∫ |ξ|² |f̂|² dξ — the Fourier-side part of the H¹ norm; the scaled
    /// profile has ‖f_M‖²_{H¹} = M² · this + M^{-2} ∫ |y|² f(y)² dy.
    pub fn frequency_second_moment(&self) -> f64 {
        let dm1 = (self.geometry.dim() - 1) as i32;
        let h = 0.5 / BUMP_NODES as f64;
        self.geometry.sphere_area()
            * self
                .rho
                .iter()
                .zip(&self.weighted)
                .map(|(&r, &w)| {
                    let chi_tilde = w / h;
                    r * r * chi_tilde * chi_tilde * r.powi(dm1) * h
                })
                .sum::<f64>()
    }
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Grid-based norms of f_M on a dedicated profile grid (no basis needed).
#[derive(Clone, Debug, Serialize)]
pub struct ProfileNorms {
    pub m: f64,
    pub l2: f64,
    /// (p, ‖f_M‖_{L^p}^p) pairs in request order.
    pub lp_pow: Vec<(f64, f64)>,
    /// ‖f_M‖²_{H¹} = ∫ |ξ|²|f̂_M|² + ∫ |x|² f_M².
    pub h1_sq: f64,
}

/// Evaluate the scaled profile's norms on its own resolution-matched grid.
pub fn profile_norms(bump: &AnnularBump, m: f64, ps: &[f64]) -> Result<ProfileNorms> {
    if m < 1.0 {
        return Err(Error::Domain(format!("profile scale M = {m} must be ≥ 1")));
    }
    let geometry = *bump.geometry();
    let extent = NORM_RADIUS / m;
    // Resolve oscillation at frequency M with ~12 points per period. The
    // residual O(h⁴) origin term of the radial d = 2 rule scales with the
    // step in profile units (M·step), so that step is capped at 0.125/M to
    // hold the 1e-6 normalization tolerance.
    let mut step = std::f64::consts::PI / (6.0 * m);
    if geometry.is_radial() {
        step = step.min(0.125 / m);
    }
    let span = if geometry.is_radial() {
        extent
    } else {
        2.0 * extent
    };
    let cells = ((span / step).ceil() as usize).max(400);
    let grid = Grid::build(geometry, extent, cells);
    let vals: Vec<f64> = grid
        .nodes()
        .par_iter()
        .map(|&x| bump.eval_scaled(m, x))
        .collect();
    let l2 = grid.integrate_map(&vals, |v| v * v).sqrt();
    let lp_pow = ps
        .iter()
        .map(|&p| {
            (
                p,
                grid.integrate_map(&vals, |v| crate::field::pow_abs(v, p)),
            )
        })
        .collect();
    let x_moment = {
        let nodes = grid.nodes();
        let sq: Vec<f64> = vals
            .iter()
            .zip(nodes)
            .map(|(&v, &x)| x * x * v * v)
            .collect();
        grid.integrate(&sq)
    };
    let h1_sq = m * m * bump.frequency_second_moment() + x_moment;
    Ok(ProfileNorms {
        m,
        l2,
        lp_pow,
        h1_sq,
    })
}

/// Spectral content of a scaled profile: coefficients ⟨f_M, h_n⟩.
#[derive(Clone, Debug)]
pub struct ProfileSpectrum {
    pub m: f64,
    /// ⟨f_M, h_n⟩ for n = 0..=n_hi.
    pub coeffs: Vec<f64>,
    /// Σ ⟨f_M, h_n⟩² — the captured L² mass (the profile has unit norm).
    pub capture: f64,
}

impl ProfileSpectrum {
    pub fn n_hi(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Σ_{n ≤ cut} f̂_n².
    pub fn captured_mass(&self, cut: usize) -> f64 {
        self.coeffs[..=cut.min(self.n_hi())]
            .iter()
            .map(|c| c * c)
            .sum()
    }

    /// Σ_{n ≤ cut} λ_n² f̂_n² — the H¹ mass of the projected profile.
    pub fn h1_mass(&self, geometry: &Geometry, cut: usize) -> f64 {
        self.coeffs[..=cut.min(self.n_hi())]
            .iter()
            .enumerate()
            .map(|(n, c)| geometry.eigenvalue_sq(n) * c * c)
            .sum()
    }

    /// Σ_{n ≤ cut} λ_n^{-2} f̂_n² — E|⟨Y_N, f_M⟩|² for the free field.
    pub fn inverse_h1_mass(&self, geometry: &Geometry, cut: usize) -> f64 {
        self.coeffs[..=cut.min(self.n_hi())]
            .iter()
            .enumerate()
            .map(|(n, c)| c * c / geometry.eigenvalue_sq(n))
            .sum()
    }
}

/// Project f_M onto modes 0..=n_hi without materializing a basis matrix.
///
/// The product f_M · h_n is supported where f_M lives (|x| ≤ support/M), so a
/// short dedicated grid suffices even when n_hi is in the tens of thousands;
/// eigenfunction columns are generated on the fly per node.
pub fn project_profile_modes(bump: &AnnularBump, m: f64, n_hi: usize) -> Result<ProfileSpectrum> {
    let geometry = *bump.geometry();
    if n_hi > mode_cap(&geometry) {
        return Err(Error::Capability(format!(
            "n_hi = {n_hi} exceeds the mode cap {}",
            mode_cap(&geometry)
        )));
    }
    let lambda_hi = geometry.eigenvalue(n_hi);
    let extent = PROFILE_SUPPORT_RADIUS / m;
    let mut step = std::f64::consts::PI / (2.6 * (m + lambda_hi));
    if geometry.is_radial() {
        step = step.min(0.3 / m);
    }
    let span = if geometry.is_radial() {
        extent
    } else {
        2.0 * extent
    };
    let cells = ((span / step).ceil() as usize).max(400);
    let grid = Grid::build(geometry, extent, cells);
    let weights = grid.effective_weights();
    let nodes = grid.nodes();

    let block = 256usize;
    let partials: Vec<Vec<f64>> = (0..nodes.len().div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let lo = b * block;
            let hi = (lo + block).min(nodes.len());
            let mut acc = vec![0.0; n_hi + 1];
            let mut col = vec![0.0; n_hi + 1];
            for j in lo..hi {
                let fx = bump.eval_scaled(m, nodes[j]) * weights[j];
                if fx == 0.0 {
                    continue;
                }
                recurrence::eigenfunction_column(&geometry, nodes[j], &mut col);
                for (a, v) in acc.iter_mut().zip(&col) {
                    *a += fx * v;
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![0.0; n_hi + 1];
    for part in &partials {
        for (c, v) in coeffs.iter_mut().zip(part) {
            *c += v;
        }
    }
    let capture = coeffs.iter().map(|c| c * c).sum();
    Ok(ProfileSpectrum { m, coeffs, capture })
}

/// A profile tied to a basis grid: values, spectral projections, and norms.
pub struct ProfileFM {
    geometry: Geometry,
    m: f64,
    grid_values: Vec<f64>,
    spectral: Vec<f64>,
    l2_norm: f64,
    capture: f64,
}

/// Evaluate f_M on the basis grid and project it onto the basis modes.
///
/// Fails with a resolution error when the basis grid is too coarse to resolve
/// oscillation at frequency M.
pub fn build_profile(bump: &AnnularBump, m: f64, basis: &EigenBasis) -> Result<ProfileFM> {
    if bump.geometry() != basis.geometry() {
        return Err(Error::Shape("bump and basis geometries differ".into()));
    }
    if m < 1.0 {
        return Err(Error::Domain(format!("profile scale M = {m} must be ≥ 1")));
    }
    let step_needed = std::f64::consts::PI / (2.5 * m);
    if basis.grid().step() > step_needed {
        return Err(Error::Resolution(format!(
            "basis grid step {:.2e} too coarse for profile scale M = {m} (need ≤ {step_needed:.2e})",
            basis.grid().step()
        )));
    }
    let grid_values: Vec<f64> = basis
        .grid()
        .nodes()
        .par_iter()
        .map(|&x| bump.eval_scaled(m, x))
        .collect();
    let l2_norm = basis.grid().integrate_map(&grid_values, |v| v * v).sqrt();
    let spectral = basis.project(&grid_values)?;
    let capture = spectral.iter().map(|c| c * c).sum();
    Ok(ProfileFM {
        geometry: *basis.geometry(),
        m,
        grid_values,
        spectral,
        l2_norm,
        capture,
    })
}

impl ProfileFM {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn spectral(&self) -> &[f64] {
        &self.spectral
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// Σ ⟨f_M, h_n⟩² over the basis modes.
    pub fn capture(&self) -> f64 {
        self.capture
    }

    pub fn spectrum(&self) -> ProfileSpectrum {
        ProfileSpectrum {
            m: self.m,
            coeffs: self.spectral.clone(),
            capture: self.capture,
        }
    }
}
