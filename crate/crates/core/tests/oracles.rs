//! Cross-checks of closed-form laws against independent pathwise oracles and
//! closed-form sums against Monte Carlo.

use gibbslab::basis::build_basis;
use gibbslab::field::{sample_field_coeffs, sigma_integral, wick_second_moment_exact};
use gibbslab::mc::{derive_stream, Accumulator};
use gibbslab::ou::ou_coupling;
use gibbslab::profile::{build_profile, capture_n, AnnularBump};
use gibbslab::Geometry;
use gibbslab_testkit::simulate_ou_mode;

/// Closed-form endpoint laws vs Euler–Maruyama at a few (M, n) pins.
/// The acceptance suite runs the full-resolution version; this one keeps the
/// unit-test budget small.
#[test]
fn ou_endpoint_laws_match_path_simulation() {
    let line = Geometry::line();
    for &(m, n) in &[(1usize, 0usize), (16, 3), (64, 10)] {
        let coupling = ou_coupling(line, m, m.max(n)).unwrap();
        let sim = simulate_ou_mode(line, m, n, 2e-4, 20_000, 42 + m as u64);
        let dt_bias = 3.0 * 2e-4; // first-order scheme: O(dt) bias guard
        assert!(
            (sim.var_x.0 - coupling.var_x(n)).abs() <= 4.0 * sim.var_x.1 + dt_bias,
            "(M={m}, n={n}) var: sim {} vs exact {}",
            sim.var_x.0,
            coupling.var_x(n)
        );
        assert!(
            (sim.cov_bx.0 - coupling.cov_bx(n)).abs() <= 4.0 * sim.cov_bx.1 + dt_bias,
            "(M={m}, n={n}) cov: sim {} vs exact {}",
            sim.cov_bx.0,
            coupling.cov_bx(n)
        );
        assert!(
            (sim.time_integrated_var.0 - coupling.time_integrated_var_x(n)).abs()
                <= 4.0 * sim.time_integrated_var.1 + dt_bias,
            "(M={m}, n={n}) ∫var: sim {} vs exact {}",
            sim.time_integrated_var.0,
            coupling.time_integrated_var_x(n)
        );
    }
}

/// Single-mode drift cost at M = 1 against the pathwise time integral:
/// the filter part is M·Σ ∫ E X²(s) ds.
#[test]
fn drift_cost_single_mode_vs_path_oracle() {
    let line = Geometry::line();
    let coupling = ou_coupling(line, 1, 1).unwrap();
    let closed = coupling.filter_drift_energy();
    let sim0 = simulate_ou_mode(line, 1, 0, 2e-4, 20_000, 7);
    let sim1 = simulate_ou_mode(line, 1, 1, 2e-4, 20_000, 8);
    let path = 1.0 * (sim0.time_integrated_var.0 + sim1.time_integrated_var.0);
    let se = (sim0.time_integrated_var.1.powi(2) + sim1.time_integrated_var.1.powi(2)).sqrt();
    assert!(
        (path - closed).abs() <= 4.0 * se + 1e-3,
        "path {path} vs closed {closed}"
    );
}

/// Empirical Wick-mass variance against the closed form at N = 32.
#[test]
fn wick_variance_matches_closed_form_n32() {
    let line = Geometry::line();
    let n = 32usize;
    let exact = wick_second_moment_exact(&line, n);
    let sigma = sigma_integral(&line, n);
    let mut stream = derive_stream(3001, 0);
    let mut acc = Accumulator::new(0);
    for _ in 0..100_000u32 {
        let f = sample_field_coeffs(line, n, &mut stream);
        let mut mass = 0.0;
        for c in f.coeffs() {
            mass += c.norm_sqr();
        }
        let w = mass - sigma;
        acc.push(w * w);
    }
    let se = (acc.variance() / acc.count() as f64).sqrt();
    assert!(
        (acc.mean() - exact).abs() <= 4.0 * se,
        "empirical {} vs exact {exact} (se {se})",
        acc.mean()
    );
}

/// E[R_p(Y_N − Z_M)] stays bounded uniformly in the filter scale for p = 4, 6:
/// the filtered low modes are damped and the tail has summable L^p content.
#[test]
fn residual_lp_moment_bounded_in_filter_scale() {
    let line = Geometry::line();
    let basis = build_basis(line, 512, 1e-8).unwrap();
    for &p in &[4.0, 6.0] {
        let mut means = Vec::new();
        for &m in &[16usize, 64] {
            let n = 8 * m;
            let coupling = ou_coupling(line, m, n).unwrap();
            let mut stream = derive_stream(500 + m as u64, 0);
            let mut acc = Accumulator::new(0);
            let mut y = vec![0.0; n + 1];
            let mut z = vec![0.0; n + 1];
            for _ in 0..2000 {
                coupling.sample_joint_into(&mut stream, &mut y, &mut z);
                let resid: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
                let field = gibbslab::field::FieldCoeffs::from_real(line, &resid).unwrap();
                let lp = gibbslab::field::lp_norm(&field, p, &basis).unwrap();
                acc.push(lp.powf(p) / p);
            }
            means.push(acc.mean());
        }
        // The claim is a uniform upper bound (the moment itself drifts as the
        // damping window moves), so only boundedness is asserted.
        assert!(
            means.iter().all(|&v| v.is_finite() && v > 0.0 && v < 10.0),
            "p={p}: residual moments {means:?} out of the uniform bound"
        );
    }
}

/// GNS ratio of the projected profiles stays bounded uniformly in the scale.
#[test]
fn gns_ratio_uniform_over_profile_scales() {
    let line = Geometry::line();
    let bump = AnnularBump::new(line).unwrap();
    let mut ratios = Vec::new();
    for &m in &[8.0f64, 16.0, 32.0] {
        let n = capture_n(&line, m);
        let basis = build_basis(line, n, 1e-8).unwrap();
        let prof = build_profile(&bump, m, &basis).unwrap();
        let field = gibbslab::field::FieldCoeffs::from_real(line, prof.spectral()).unwrap();
        let r = gibbslab::field::gns_ratio(&field, 4.0, &basis).unwrap();
        assert!(r.is_finite() && r > 0.0);
        ratios.push(r);
    }
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 4.0, "GNS ratios across scales: {ratios:?}");
}

/// The centered residual mass second moment (closed form) against joint
/// endpoint sampling at M = 16, N = 128.
#[test]
fn centered_residual_second_moment_mc_crosscheck() {
    let line = Geometry::line();
    let (m, n) = (16usize, 128usize);
    let coupling = ou_coupling(line, m, n).unwrap();
    let exact = coupling.centered_residual_second_moment();
    // E‖Y−Z‖² in closed form: Var X_n for filtered modes, λ^{-2} for the tail.
    let mean_mass: f64 = (0..=m).map(|k| coupling.var_x(k)).sum::<f64>()
        + (m + 1..=n)
            .map(|k| 1.0 / line.eigenvalue_sq(k))
            .sum::<f64>();
    let mut stream = derive_stream(2024, 0);
    let mut acc = Accumulator::new(0);
    let mut y = vec![0.0; n + 1];
    let mut z = vec![0.0; n + 1];
    for _ in 0..100_000u32 {
        coupling.sample_joint_into(&mut stream, &mut y, &mut z);
        let mass: f64 = y.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
        let centered = mass - mean_mass;
        acc.push(centered * centered);
    }
    let se = (acc.variance() / acc.count() as f64).sqrt();
    assert!(
        (acc.mean() - exact).abs() <= 4.0 * se,
        "MC {} vs closed {exact} (se {se})",
        acc.mean()
    );
    // And the scale claim: ≤ C·M^{-1} log M with the pinned constant.
    assert!(exact <= 1.0 * (m as f64).ln() / m as f64);
}

/// The shifted-field Wick statistic behind the key probability has second
/// moment ≲ M^{-1} log M: it shrinks with the filter scale.
#[test]
fn key_statistic_second_moment_shrinks() {
    let line = Geometry::line();
    let bump = AnnularBump::new(line).unwrap();
    let mut values = Vec::new();
    for &m in &[16usize, 64] {
        let n = capture_n(&line, m as f64);
        let coupling = ou_coupling(line, m, n).unwrap();
        let spectrum = gibbslab::profile::project_profile_modes(&bump, m as f64, n).unwrap();
        let plan = gibbslab::drift::DriftPlan::build(coupling, &spectrum, 1.0).unwrap();
        let sigma = sigma_integral(&line, n);
        let mut stream = derive_stream(31_337 + m as u64, 0);
        let mut acc = Accumulator::new(0);
        // Reconstruct the statistic through the public sampler: the key
        // probability is P(|w| ≤ K), so P(|w| > t) bounds come from the same
        // draw; here the raw second moment is accumulated directly.
        let coupling = ou_coupling(line, m, n).unwrap();
        let mut y = vec![0.0; n + 1];
        let mut z = vec![0.0; n + 1];
        let sqrt_alpha = plan.alpha().sqrt();
        for _ in 0..30_000u32 {
            coupling.sample_joint_into(&mut stream, &mut y, &mut z);
            let mut mass = 0.0;
            for k in 0..=n {
                let theta = -z[k]
                    + if k <= spectrum.n_hi() {
                        sqrt_alpha * spectrum.coeffs[k]
                    } else {
                        0.0
                    };
                let v = y[k] + theta;
                mass += v * v;
            }
            let w = mass - sigma;
            acc.push(w * w);
        }
        let bound = 2.0 * (m as f64).ln() / m as f64;
        assert!(
            acc.mean() <= bound,
            "M={m}: E w² = {} > {bound}",
            acc.mean()
        );
        values.push(acc.mean());
    }
    assert!(
        values[1] < values[0],
        "second moment not shrinking: {values:?}"
    );
}

/// Radial high-moment boundedness: the r = 4 density moment stays finite and
/// stable across truncations in the subcritical radial regime.
#[test]
fn radial_density_moment_r4_bounded() {
    let r2 = Geometry::radial(2).unwrap();
    let basis = build_basis(r2, 64, 1e-6).unwrap();
    let mut means = Vec::new();
    for &n in &[16usize, 64] {
        let spec = gibbslab::gibbs::GibbsSpec::new(r2, 3.0, 1.0, n).unwrap();
        let est = gibbslab::gibbs::density_moment(&spec, &basis, 4.0, 20_000, 404).unwrap();
        assert!(est.mean.is_finite());
        means.push(est.mean);
    }
    let spread = means[1].max(means[0]) / means[1].min(means[0]);
    assert!(spread < 2.0, "r=4 radial moments unstable: {means:?}");
}

/// For supercritical p the running maximum of the integrand keeps growing
/// across sample-size doublings — the diagnostic signature of a
/// non-integrable density (chunked streams make the sample sets nested).
#[test]
fn supercritical_running_max_grows() {
    let line = Geometry::line();
    let basis = build_basis(line, 64, 1e-10).unwrap();
    let spec = gibbslab::gibbs::GibbsSpec::new(line, 6.0, 1.0, 64).unwrap();
    let mut maxima = Vec::new();
    for &samples in &[10_000u64, 100_000, 1_000_000] {
        let est = gibbslab::gibbs::estimate_partition(&spec, &basis, samples, 606).unwrap();
        maxima.push(est.running_max);
    }
    // Nested sample sets make the sequence nondecreasing by construction; the
    // diagnostic content is that it keeps growing by orders of magnitude
    // instead of stabilizing.
    assert!(
        maxima[0] <= maxima[1] && maxima[1] <= maxima[2],
        "running max decreased: {maxima:?}"
    );
    assert!(
        maxima[2] > 4.0 * maxima[0],
        "running max stabilized: {maxima:?}"
    );
}

/// Sampled-field L^p/H^{-δ} moments agree between the two independent
/// formulas for the H^{-δ} second moment (spectral sum vs sampling).
#[test]
fn h_minus_delta_second_moment_two_routes() {
    let r2 = Geometry::radial(2).unwrap();
    let n = 48usize;
    let exact: f64 = (0..=n).map(|k| r2.eigenvalue(k).powi(-3)).sum();
    let mut stream = derive_stream(81, 0);
    let mut acc = Accumulator::new(0);
    for _ in 0..50_000u32 {
        let f = sample_field_coeffs(r2, n, &mut stream);
        let v = gibbslab::field::sobolev_norm(&f, -0.5);
        acc.push(v * v);
    }
    let se = (acc.variance() / acc.count() as f64).sqrt();
    assert!((acc.mean() - exact).abs() <= 4.0 * se);
}
