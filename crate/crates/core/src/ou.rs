//! Exponentially filtered approximation of the Brownian field.
//!
//! Per mode n ≤ M the filter output solves
//! dZ̃(n,t) = λ_n^{-1}√M (Ỹ(n,t) − Z̃(n,t)) dt, Z̃(n,0) = 0, while the
//! residual X_n = Ỹ(n) − Z̃(n) is an Ornstein–Uhlenbeck process
//! dX_n = −a_n X_n dt + λ_n^{-1} dB_n with rate a_n = λ_n^{-1}√M. Everything
//! needed downstream (endpoint covariances, time-integrated second moments)
//! is closed form, so sampling draws exact joint endpoints and no pathwise
//! integration happens outside the test oracles.

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::mc::RngStream;
use serde::Serialize;

/// Closed-form joint endpoint law of (B_n(1), X_n(1)) per mode.
#[derive(Clone, Debug, Serialize)]
pub struct OuCoupling {
    geometry: Geometry,
    m: usize,
    n_cut: usize,
    /// Filter rates a_n = λ_n^{-1} √M for n ≤ M.
    rates: Vec<f64>,
    /// E X_n(1)² = λ_n^{-2} (1 − e^{-2a_n}) / (2 a_n).
    var_x: Vec<f64>,
    /// E[B_n(1) X_n(1)] = λ_n^{-1} (1 − e^{-a_n}) / a_n.
    cov_bx: Vec<f64>,
}

/// Build the coupling for filter scale M and truncation N, 1 ≤ M ≤ N.
pub fn ou_coupling(geometry: Geometry, m: usize, n_cut: usize) -> Result<OuCoupling> {
    if m < 1 {
        return Err(Error::Domain("filter scale M must be ≥ 1".into()));
    }
    if m > n_cut {
        return Err(Error::Domain(format!(
            "filter scale M = {m} must not exceed the truncation N = {n_cut}"
        )));
    }
    let sqrt_m = (m as f64).sqrt();
    let mut rates = Vec::with_capacity(m + 1);
    let mut var_x = Vec::with_capacity(m + 1);
    let mut cov_bx = Vec::with_capacity(m + 1);
    for n in 0..=m {
        let lam = geometry.eigenvalue(n);
        let a = sqrt_m / lam;
        let v = (1.0 - (-2.0 * a).exp()) / (2.0 * a) / (lam * lam);
        let c = (1.0 - (-a).exp()) / a / lam;
        debug_assert!(v > 0.0 && v <= 1.0 / (lam * lam));
        debug_assert!(c * c <= v * 1.0 + 1e-15);
        rates.push(a);
        var_x.push(v);
        cov_bx.push(c);
    }
    Ok(OuCoupling {
        geometry,
        m,
        n_cut,
        rates,
        var_x,
        cov_bx,
    })
}

impl OuCoupling {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn filter_scale(&self) -> usize {
        self.m
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn rate(&self, n: usize) -> f64 {
        self.rates[n]
    }

    pub fn var_x(&self, n: usize) -> f64 {
        self.var_x[n]
    }

    pub fn cov_bx(&self, n: usize) -> f64 {
        self.cov_bx[n]
    }

    /// E |Z̃_n(1)|² for a filtered mode (n ≤ M).
    pub fn var_z(&self, n: usize) -> f64 {
        let lam2 = self.geometry.eigenvalue_sq(n);
        1.0 / lam2 - 2.0 * self.cov_bx[n] / self.geometry.eigenvalue(n) + self.var_x[n]
    }

    /// E[Ỹ_n(1) Z̃_n(1)] for a filtered mode.
    pub fn cov_yz(&self, n: usize) -> f64 {
        let lam = self.geometry.eigenvalue(n);
        1.0 / (lam * lam) - self.cov_bx[n] / lam
    }

    /// ∫₀¹ E X_n(s)² ds in closed form.
    pub fn time_integrated_var_x(&self, n: usize) -> f64 {
        let a = self.rates[n];
        let lam2 = self.geometry.eigenvalue_sq(n);
        (1.0 - (1.0 - (-2.0 * a).exp()) / (2.0 * a)) / (2.0 * a) / lam2
    }

    /// E ‖Z_M‖²_{L²} = Σ_{n ≤ M} E|Z̃_n|², which grows like log M.
    pub fn filter_mass_expectation(&self) -> f64 {
        (0..=self.m).map(|n| self.var_z(n)).sum()
    }

    /// E[2 Re⟨Y_N, Z_M⟩ − ‖Z_M‖²] = Σ_{n ≤ M} (λ_n^{-2} − Var X_n) — the
    /// numerator of the planted amplitude, also ~ log M.
    pub fn amplitude_numerator(&self) -> f64 {
        (0..=self.m)
            .map(|n| 1.0 / self.geometry.eigenvalue_sq(n) - self.var_x[n])
            .sum()
    }

    /// E |:‖Y_N − Z_M‖²:|² = Σ_{n ≤ M} 2 (Var X_n)² + Σ_{M < n ≤ N} 2 λ_n^{-4};
    /// bounded by ~ M^{-1} log M.
    pub fn centered_residual_second_moment(&self) -> f64 {
        let filtered: f64 = (0..=self.m)
            .map(|n| 2.0 * self.var_x[n] * self.var_x[n])
            .sum();
        let tail: f64 = (self.m + 1..=self.n_cut)
            .map(|n| {
                let lam2 = self.geometry.eigenvalue_sq(n);
                2.0 / (lam2 * lam2)
            })
            .sum();
        filtered + tail
    }

    /// E ∫₀¹ ‖(d/ds) Z_M(s)‖²_{H¹} ds = M Σ_{n ≤ M} ∫₀¹ E X_n(s)² ds ≲ M.
    pub fn filter_drift_energy(&self) -> f64 {
        self.m as f64
            * (0..=self.m)
                .map(|n| self.time_integrated_var_x(n))
                .sum::<f64>()
    }

    /// Draw one exact joint endpoint (y, z): y_n = B_n(1)/λ_n for all n ≤ N,
    /// z_n = y_n − X_n(1) for n ≤ M and 0 beyond. Two normals per filtered
    /// mode, one per tail mode, modes ascending.
    pub fn sample_joint_endpoint(&self, stream: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        let mut y = vec![0.0; self.n_cut + 1];
        let mut z = vec![0.0; self.n_cut + 1];
        self.sample_joint_into(stream, &mut y, &mut z);
        (y, z)
    }

    /// In-place variant used by the Monte Carlo loops.
    pub fn sample_joint_into(&self, stream: &mut RngStream, y: &mut [f64], z: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n_cut + 1);
        debug_assert_eq!(z.len(), self.n_cut + 1);
        for n in 0..=self.m {
            let lam = self.geometry.eigenvalue(n);
            let b = stream.normal();
            let resid_sd = (self.var_x[n] - self.cov_bx[n] * self.cov_bx[n])
                .max(0.0)
                .sqrt();
            let x = self.cov_bx[n] * b + resid_sd * stream.normal();
            y[n] = b / lam;
            z[n] = y[n] - x;
        }
        for (n, zn) in z
            .iter_mut()
            .enumerate()
            .take(self.n_cut + 1)
            .skip(self.m + 1)
        {
            y[n] = stream.normal() / self.geometry.eigenvalue(n);
            *zn = 0.0;
        }
    }
}
