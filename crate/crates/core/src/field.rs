//! Truncated Gaussian fields: sampling, Wick-ordered mass, and norms.
//!
//! Coefficient convention: the free-field coefficients are u_n = g_n / λ_n
//! with g_n i.i.d. standard real Gaussians (E g_n² = 1). Amplitudes are stored
//! as complex numbers so deterministic complex test fields fit the same type;
//! sampled fields have zero imaginary part. The real convention is what makes
//! the Wick-mass chaos identities exact: Var(g² − 1) = 2, so the Wick mass
//! Σ (g_n² − 1)/λ_n² has variance exactly Σ 2 λ_n^{-4}.

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::mc::RngStream;
use num_complex::Complex64;
use serde::Serialize;

/// How a set of coefficients came to be.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Sampled { seed: u64, stream: u64 },
    Deterministic,
}

/// A truncated spectral field: coefficients (u_n)_{n ≤ n_cut}.
#[derive(Clone, Debug)]
pub struct FieldCoeffs {
    geometry: Geometry,
    coeffs: Vec<Complex64>,
    provenance: Provenance,
}

impl FieldCoeffs {
    pub fn new(geometry: Geometry, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a field needs at least mode 0".into()));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Domain("field coefficients must be finite".into()));
        }
        Ok(FieldCoeffs {
            geometry,
            coeffs,
            provenance: Provenance::Deterministic,
        })
    }

    /// Field with a single unit coefficient in direction `n`.
    pub fn unit_mode(geometry: Geometry, n: usize, n_cut: usize) -> Self {
        let mut coeffs = vec![Complex64::ZERO; n_cut + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        FieldCoeffs {
            geometry,
            coeffs,
            provenance: Provenance::Deterministic,
        }
    }

    pub fn from_real(geometry: Geometry, re: &[f64]) -> Result<Self> {
        Self::new(
            geometry,
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Truncation index N (coefficients run over n = 0..=N).
    pub fn n_cut(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Coefficient ℓ² norm (equals the L² norm of the synthesized field).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }
}

/// Draw u_N ~ (P_{≤N})_* μ: u_n = g_n / λ_n with independent standard real
/// Gaussians g_n, modes in ascending order.
pub fn sample_field(
    basis: &EigenBasis,
    n_cut: usize,
    stream: &mut RngStream,
) -> Result<FieldCoeffs> {
    if n_cut > basis.n_max() {
        return Err(Error::Shape(format!(
            "n_cut = {n_cut} exceeds basis n_max = {}",
            basis.n_max()
        )));
    }
    Ok(sample_field_coeffs(*basis.geometry(), n_cut, stream))
}

/// Basis-free sampling path (the coefficients only need the spectrum).
pub fn sample_field_coeffs(
    geometry: Geometry,
    n_cut: usize,
    stream: &mut RngStream,
) -> FieldCoeffs {
    let provenance = Provenance::Sampled {
        seed: stream.root_seed(),
        stream: stream.stream_id(),
    };
    let coeffs = (0..=n_cut)
        .map(|n| Complex64::new(stream.normal() / geometry.eigenvalue(n), 0.0))
        .collect();
    FieldCoeffs {
        geometry,
        coeffs,
        provenance,
    }
}

/// Exact partial sum Σ_{n ≤ N} λ_n^{-2} — the Wick renormalization constant
/// ∫ σ_N dx.
pub fn sigma_integral(geometry: &Geometry, n_cut: usize) -> f64 {
    (0..=n_cut).map(|n| 1.0 / geometry.eigenvalue_sq(n)).sum()
}

/// Closed-form second moment of the Wick mass: Σ_{n ≤ N} 2 λ_n^{-4}.
pub fn wick_second_moment_exact(geometry: &Geometry, n_cut: usize) -> f64 {
    (0..=n_cut)
        .map(|n| {
            let l2 = geometry.eigenvalue_sq(n);
            2.0 / (l2 * l2)
        })
        .sum()
}

/// The spatial integral of the Wick power :|u_N|²: computed in coefficient
/// space: Σ |u_n|² − Σ λ_n^{-2}.
pub fn wick_mass(field: &FieldCoeffs) -> f64 {
    let mass: f64 = field.coeffs.iter().map(|c| c.norm_sqr()).sum();
    mass - sigma_integral(&field.geometry, field.n_cut())
}

/// Renormalization bookkeeping for a truncation level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WickMassStats {
    pub n_cut: usize,
    /// Σ λ_n^{-2} (grows like log N).
    pub trace: f64,
    /// Σ 2 λ_n^{-4} (converges as N → ∞).
    pub second_moment: f64,
}

impl WickMassStats {
    pub fn new(geometry: &Geometry, n_cut: usize) -> Self {
        WickMassStats {
            n_cut,
            trace: sigma_integral(geometry, n_cut),
            second_moment: wick_second_moment_exact(geometry, n_cut),
        }
    }
}

/// |v|^p with cheap paths for the integer and half-integer exponents that
/// dominate the workloads.
#[inline]
pub fn pow_abs(v: f64, p: f64) -> f64 {
    let a = v.abs();
    let twice = 2.0 * p;
    if twice == twice.floor() && (1.0..=16.0).contains(&p) {
        let k = twice as u32;
        let half = if k % 2 == 1 { a.sqrt() } else { 1.0 };
        let mut acc = half;
        for _ in 0..(k / 2) {
            acc *= a;
        }
        acc
    } else {
        a.powf(p)
    }
}

/// Synthesize a complex field on the basis grid.
pub fn synthesize(field: &FieldCoeffs, basis: &EigenBasis) -> Result<Vec<Complex64>> {
    if field.n_cut() > basis.n_max() {
        return Err(Error::Shape(format!(
            "field n_cut = {} exceeds basis n_max = {}",
            field.n_cut(),
            basis.n_max()
        )));
    }
    let re: Vec<f64> = field.coeffs.iter().map(|c| c.re).collect();
    let im: Vec<f64> = field.coeffs.iter().map(|c| c.im).collect();
    let re_grid = basis.synthesize(&re)?;
    let any_im = im.iter().any(|&v| v != 0.0);
    let im_grid = if any_im {
        basis.synthesize(&im)?
    } else {
        vec![0.0; basis.grid().len()]
    };
    Ok(re_grid
        .into_iter()
        .zip(im_grid)
        .map(|(r, i)| Complex64::new(r, i))
        .collect())
}

/// Quadrature value of ‖u_N‖_{L^p} via grid synthesis.
pub fn lp_norm(field: &FieldCoeffs, p: f64, basis: &EigenBasis) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain(format!("p = {p} < 1")));
    }
    let vals = synthesize(field, basis)?;
    let moduli: Vec<f64> = vals.iter().map(|c| c.norm()).collect();
    Ok(basis
        .grid()
        .integrate_map(&moduli, |v| pow_abs(v, p))
        .powf(1.0 / p))
}

/// Sobolev norm (Σ λ_n^{2s} |u_n|²)^{1/2}; s may be negative.
pub fn sobolev_norm(field: &FieldCoeffs, s: f64) -> f64 {
    field
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| field.geometry.eigenvalue_sq(n).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The Gagliardo–Nirenberg–Sobolev ratio
/// ‖u‖_{L^p}^p / (‖u‖_{H¹}^{(p−2)d/2} · ‖u‖_{L²}^{2+(p−2)(2−d)/2}),
/// with the coefficient ℓ² norm as the L² factor.
pub fn gns_ratio(field: &FieldCoeffs, p: f64, basis: &EigenBasis) -> Result<f64> {
    let d = field.geometry.dim() as f64;
    if p <= 2.0 {
        return Err(Error::Domain(format!("GNS ratio needs p > 2, got {p}")));
    }
    if !field.geometry.admissible_p(p) {
        return Err(Error::Domain(format!(
            "p = {p} outside the admissible range for d = {d}"
        )));
    }
    let l2 = field.l2_norm();
    if l2 == 0.0 {
        return Err(Error::Degenerate("GNS ratio of the zero field".into()));
    }
    let lp = lp_norm(field, p, basis)?;
    let h1 = sobolev_norm(field, 1.0);
    let e_h1 = (p - 2.0) * d / 2.0;
    let e_l2 = 2.0 + (p - 2.0) * (2.0 - d) / 2.0;
    Ok(lp.powf(p) / (h1.powf(e_h1) * l2.powf(e_l2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::mc::derive_stream;

    fn line_basis(n_max: usize) -> EigenBasis {
        build_basis(Geometry::line(), n_max, 1e-10).unwrap()
    }

    #[test]
    fn sigma_integral_examples() {
        let line = Geometry::line();
        assert!((sigma_integral(&line, 2) - (1.0 + 1.0 / 3.0 + 1.0 / 5.0)).abs() < 1e-15);
        assert_eq!(sigma_integral(&line, 0), 1.0);
        let r2 = Geometry::radial(2).unwrap();
        assert_eq!(sigma_integral(&r2, 0), 0.5);
    }

    #[test]
    fn wick_mass_deterministic_examples() {
        let line = Geometry::line();
        // Zero field at N = 4.
        let zero = FieldCoeffs::from_real(line, &[0.0; 5]).unwrap();
        let expect = -(1.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0 + 1.0 / 9.0);
        assert!((wick_mass(&zero) - expect).abs() < 1e-12);

        // Single mode with |g_0|² = 2 at N = 0.
        let f = FieldCoeffs::from_real(line, &[2f64.sqrt()]).unwrap();
        assert!((wick_mass(&f) - 1.0).abs() < 1e-15);

        // g_3 = 1 at N = 8: |u_3|² = 1/7.
        let mut e3 = FieldCoeffs::unit_mode(line, 3, 8);
        e3.scale(1.0 / line.eigenvalue(3));
        let expect = 1.0 / 7.0 - sigma_integral(&line, 8);
        assert!((wick_mass(&e3) - expect).abs() < 1e-12);
    }

    #[test]
    fn wick_second_moment_examples() {
        let line = Geometry::line();
        assert!(
            (wick_second_moment_exact(&line, 2) - 2.0 * (1.0 + 1.0 / 9.0 + 1.0 / 25.0)).abs()
                < 1e-12
        );
        assert_eq!(wick_second_moment_exact(&line, 0), 2.0);
        // The tail sum converges: Σ_{n≥0} 2 λ_n^{-4} = 2 · π²/8 on the line.
        let full = 2.0 * std::f64::consts::PI.powi(2) / 8.0;
        assert!(wick_second_moment_exact(&line, 4000) < full);
        assert!(full - wick_second_moment_exact(&line, 4000) < 1e-3);
    }

    #[test]
    fn sampling_first_two_moments() {
        let basis = line_basis(8);
        let n_samples = 100_000;
        let mut stream = derive_stream(11, 0);
        let mut mass = vec![0.0f64; 9];
        let mut cross = 0.0f64; // E[u_1 u_2]
        for _ in 0..n_samples {
            let f = sample_field(&basis, 8, &mut stream).unwrap();
            for (n, c) in f.coeffs().iter().enumerate() {
                mass[n] += c.norm_sqr();
            }
            cross += f.coeffs()[1].re * f.coeffs()[2].re;
        }
        let se = 2f64.sqrt() / (n_samples as f64).sqrt(); // Var(g²) = 2
        for (n, m) in mass.iter().enumerate() {
            let scaled = m / n_samples as f64 * basis.geometry().eigenvalue_sq(n);
            assert!(
                (scaled - 1.0).abs() < 3.0 * se,
                "mode {n}: E|u|²λ² = {scaled}"
            );
        }
        let cross_se = (basis.geometry().eigenvalue(1) * basis.geometry().eigenvalue(2)).recip()
            / (n_samples as f64).sqrt();
        assert!((cross / n_samples as f64).abs() < 3.0 * cross_se);
    }

    #[test]
    fn sampled_h_minus_delta_norm_matches_closed_form() {
        let basis = line_basis(64);
        let n_samples = 20_000;
        let mut stream = derive_stream(12, 0);
        let mut acc = crate::mc::Accumulator::new(0);
        for _ in 0..n_samples {
            let f = sample_field(&basis, 64, &mut stream).unwrap();
            let v = sobolev_norm(&f, -0.5);
            acc.push(v * v);
        }
        let expect: f64 = (0..=64)
            .map(|n| basis.geometry().eigenvalue(n).powi(-3))
            .sum();
        let se = (acc.variance() / n_samples as f64).sqrt();
        assert!(
            (acc.mean() - expect).abs() < 3.0 * se,
            "{} vs {expect}",
            acc.mean()
        );
    }

    #[test]
    fn lp_norm_examples() {
        let basis = line_basis(8);
        let line = Geometry::line();
        let h0 = FieldCoeffs::unit_mode(line, 0, 0);
        let expect = (2.0 * std::f64::consts::PI).powf(-0.125);
        assert!((lp_norm(&h0, 4.0, &basis).unwrap() - expect).abs() < 1e-10);

        let zero = FieldCoeffs::from_real(line, &[0.0; 3]).unwrap();
        assert_eq!(lp_norm(&zero, 3.0, &basis).unwrap(), 0.0);

        // Homogeneity: ‖2 h_0‖_p = 2 ‖h_0‖_p.
        for &p in &[3.0, 4.0, 6.0] {
            let mut two = FieldCoeffs::unit_mode(line, 0, 0);
            two.scale(2.0);
            let a = lp_norm(&two, p, &basis).unwrap();
            let b = 2.0 * lp_norm(&h0, p, &basis).unwrap();
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn parseval_identity() {
        let basis = line_basis(32);
        let mut stream = derive_stream(5, 3);
        for _ in 0..10 {
            let f = sample_field(&basis, 32, &mut stream).unwrap();
            let l2_grid = lp_norm(&f, 2.0, &basis).unwrap();
            let l2_coeff: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
            assert!((l2_grid * l2_grid - l2_coeff).abs() <= 1e-6 * l2_coeff);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let line = Geometry::line();
        let h2 = FieldCoeffs::unit_mode(line, 2, 4);
        assert!((sobolev_norm(&h2, 1.0) - 5f64.sqrt()).abs() < 1e-14);
        let h0 = FieldCoeffs::unit_mode(line, 0, 0);
        assert_eq!(sobolev_norm(&h0, 3.7), 1.0);
        let mut stream = derive_stream(8, 0);
        let f = sample_field_coeffs(line, 16, &mut stream);
        assert!((sobolev_norm(&f, 0.0) - f.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn gns_ratio_ground_state_and_samples() {
        let basis = line_basis(32);
        let line = Geometry::line();
        let h0 = FieldCoeffs::unit_mode(line, 0, 0);
        let expect = (2.0 * std::f64::consts::PI).powf(-0.5);
        let got = gns_ratio(&h0, 4.0, &basis).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");

        let zero = FieldCoeffs::from_real(line, &[0.0; 4]).unwrap();
        assert!(matches!(
            gns_ratio(&zero, 4.0, &basis),
            Err(Error::Degenerate(_))
        ));

        let mut stream = derive_stream(21, 0);
        let mut max_ratio = 0.0f64;
        for _ in 0..500 {
            let f = sample_field(&basis, 32, &mut stream).unwrap();
            max_ratio = max_ratio.max(gns_ratio(&f, 4.0, &basis).unwrap());
        }
        assert!(
            max_ratio.is_finite() && max_ratio <= 10.0,
            "max {max_ratio}"
        );
    }

    #[test]
    fn pow_abs_matches_powf() {
        for &p in &[1.0, 2.0, 3.0, 3.5, 4.0, 6.0, 8.0, 2.7] {
            for &v in &[-2.3, -0.4, 0.0, 0.9, 5.1] {
                let a = pow_abs(v, p);
                let b = (v as f64).abs().powf(p);
                assert!(
                    (a - b).abs() <= 1e-13 * b.max(1.0),
                    "p={p} v={v}: {a} vs {b}"
                );
            }
        }
    }
}
