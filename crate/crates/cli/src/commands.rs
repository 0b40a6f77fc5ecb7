//! Subcommand implementations.

use crate::config::{reject, ConfigRejection};
use crate::output::OutputDir;
use anyhow::Result;
use gibbslab::basis::{build_basis, EigenBasis, RESIDUAL_TOL};
use gibbslab::drift::{divergence_scan, filter_diagnostics, key_probability, DriftPlan};
use gibbslab::field::{sample_field_coeffs, sigma_integral, wick_second_moment_exact};
use gibbslab::gibbs::{
    boundary_probability, estimate_partition_with_mode, tail_neglected_variance,
    tail_set_probability, GibbsSpec, IndicatorMode,
};
use gibbslab::mc::{derive_stream, Accumulator, McEstimate, DEFAULT_CHUNK_SIZE};
use gibbslab::ou::ou_coupling;
use gibbslab::profile::{capture_n, project_profile_modes, AnnularBump};
use gibbslab::report::RunRecord;
use gibbslab::Geometry;
use serde_json::json;
use std::time::Instant;

/// Outcome of a command: all checks passed, or some statistical check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    StatFail,
}

/// Default basis accuracy: tight for small spectral ranges, relaxed where the
/// grid cost would be wasted on Monte Carlo noise floors.
pub fn default_accuracy(geometry: &Geometry, n_max: usize) -> f64 {
    if geometry.dim() == 1 {
        if n_max <= 128 {
            1e-10
        } else {
            1e-8
        }
    } else if n_max <= 64 {
        1e-8
    } else {
        1e-6
    }
}

fn record(
    op: &str,
    geometry: &Geometry,
    est: &McEstimate,
    wall_ms: u64,
    f: impl FnOnce(&mut RunRecord),
) -> RunRecord {
    let mut r = RunRecord::from_estimate(op, geometry.dim(), geometry.is_radial(), est, wall_ms);
    f(&mut r);
    r
}

// ---------------------------------------------------------------- basis-verify

pub fn basis_verify(geometry: Geometry, n_max: usize, tol: f64, out: &OutputDir) -> Result<Status> {
    let t0 = Instant::now();
    let basis = build_basis(geometry, n_max, tol)?;
    let report = basis.report();
    out.write_json("basis_report.json", &report)?;
    let mut failures = Vec::new();
    if report.max_orthonormality_error > tol {
        failures.push(format!(
            "orthonormality {:.2e} > {tol:.2e}",
            report.max_orthonormality_error
        ));
    }
    if geometry.dim() == 1 {
        if let Some(r) = report.max_eigen_residual {
            if r > RESIDUAL_TOL {
                failures.push(format!("eigen residual {r:.2e} > {RESIDUAL_TOL:.2e}"));
            }
        }
    }
    // L^p upper-bound suite: the ratio ‖h_n‖_p λ_n^s must stay within a
    // bounded spread across the high modes.
    let suite: Vec<(f64, f64, usize)> = if geometry.dim() == 1 {
        // (p, λ exponent, top n): decay λ^{-1/6} for p ≥ 4.
        [4.0, 6.0, 8.0]
            .iter()
            .map(|&p| (p, 1.0 / 6.0, n_max.min(512)))
            .collect()
    } else {
        // p = 6 > 2d/(d-1) boundary: decay λ^{d(1/2-1/p)-1}.
        let d = geometry.dim() as f64;
        vec![(6.0, 1.0 - d * (0.5 - 1.0 / 6.0), n_max.min(256))]
    };
    for (p, s, top) in suite {
        if top < 32 {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for n in 16..=top {
            let r = basis.eigen_lp_norm(n, p)? * basis.lambda(n).powf(s);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(hi.is_finite() && lo > 0.0 && hi / lo <= 3.0) {
            failures.push(format!(
                "‖h_n‖_{p} λ^{s:.3} spread {:.3} over n ∈ [16, {top}] exceeds 3",
                hi / lo
            ));
        }
    }
    println!(
        "basis-verify: dim={} radial={} n_max={n_max} grid={} orth={:.2e} resid={:?} ({} ms)",
        geometry.dim(),
        geometry.is_radial(),
        report.grid_points,
        report.max_orthonormality_error,
        report.max_eigen_residual,
        t0.elapsed().as_millis()
    );
    for f in &failures {
        println!("  FAIL {f}");
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::StatFail
    })
}

// --------------------------------------------------------------- field-moments

pub fn field_moments(
    geometry: Geometry,
    modes_grid: &[usize],
    samples: u64,
    seed: u64,
    out: &OutputDir,
) -> Result<Status> {
    let mut failures = Vec::new();
    let mut records = Vec::new();

    // Wick centering and the chaos variance identity per truncation level.
    for (gi, &n) in modes_grid.iter().enumerate() {
        let t = Instant::now();
        let (mean_acc, sq_acc) = wick_moments(geometry, n, samples, seed.wrapping_add(gi as u64));
        let wall = t.elapsed().as_millis() as u64;
        let exact = wick_second_moment_exact(&geometry, n);
        let mean_est = mean_acc.finish(seed, 0, DEFAULT_CHUNK_SIZE);
        let se_mean = mean_est.stderr_or_zero();
        if mean_est.mean.abs() > 4.0 * se_mean {
            failures.push(format!(
                "wick mean at N={n}: {:.4e} exceeds 4·stderr {:.4e}",
                mean_est.mean, se_mean
            ));
        }
        let var_est = sq_acc.finish(seed, 0, DEFAULT_CHUNK_SIZE);
        let se_var = var_est.stderr_or_zero();
        if (var_est.mean - exact).abs() > 4.0 * se_var {
            failures.push(format!(
                "wick variance at N={n}: {:.5} vs exact {exact:.5} (4·stderr {:.2e})",
                var_est.mean,
                4.0 * se_var
            ));
        }
        records.push(record("wick_mean", &geometry, &mean_est, wall, |r| {
            r.n_cut = Some(n);
        }));
        records.push(record(
            "wick_second_moment",
            &geometry,
            &var_est,
            wall,
            |r| {
                r.n_cut = Some(n);
                r.notes.push(format!("exact={exact}"));
            },
        ));
    }

    // Cauchy rate between consecutive truncations: E|wick(N') − wick(N)|²
    // equals the tail sum Σ 2λ^{-4} over N < n ≤ N'.
    for w in modes_grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let t = Instant::now();
        let mut acc = Accumulator::new(0);
        let mut stream = derive_stream(seed ^ 0xca0c, 0);
        for _ in 0..samples.min(200_000) {
            let mut inc = 0.0;
            for n in 0..=hi {
                let g = stream.normal();
                if n > lo {
                    inc += (g * g - 1.0) / geometry.eigenvalue_sq(n);
                }
            }
            acc.push(inc * inc);
        }
        let est = acc.finish(seed, 0, DEFAULT_CHUNK_SIZE);
        let exact: f64 = (lo + 1..=hi)
            .map(|n| {
                let l2 = geometry.eigenvalue_sq(n);
                2.0 / (l2 * l2)
            })
            .sum();
        if (est.mean - exact).abs() > 4.0 * est.stderr_or_zero() {
            failures.push(format!(
                "Cauchy increment N={lo}→{hi}: {:.5e} vs {exact:.5e}",
                est.mean
            ));
        }
        records.push(record(
            "wick_cauchy_increment",
            &geometry,
            &est,
            t.elapsed().as_millis() as u64,
            |r| {
                r.n_cut = Some(hi);
                r.notes.push(format!("from N={lo}, exact={exact}"));
            },
        ));
    }

    // L^p moment boundedness across the truncation grid.
    let p_list: Vec<f64> = if geometry.dim() == 1 {
        vec![3.0, 4.0, 5.0]
    } else {
        vec![3.0, 3.5]
    };
    let n_top = *modes_grid.iter().max().unwrap();
    let basis = build_basis(geometry, n_top, default_accuracy(&geometry, n_top))?;
    let lp_samples = samples.min(20_000);
    for &p in &p_list {
        let mut means = Vec::new();
        for (gi, &n) in modes_grid.iter().enumerate() {
            let t = Instant::now();
            let est = lp_moment(&basis, n, p, lp_samples, seed.wrapping_add(77 + gi as u64));
            means.push(est.mean);
            records.push(record(
                "lp_moment",
                &geometry,
                &est,
                t.elapsed().as_millis() as u64,
                |r| {
                    r.n_cut = Some(n);
                    r.p = Some(p);
                },
            ));
        }
        let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = means.iter().cloned().fold(0.0f64, f64::max);
        if !(hi.is_finite() && hi / lo <= 2.0) {
            failures.push(format!(
                "E‖u_N‖_{p}^{p} not stable across N grid: spread {:.3}",
                hi / lo
            ));
        }
    }

    // Khintchine direction: (E|Σ c_n g_n|^p)^{1/p} ≤ √p (Σ c²)^{1/2} for the
    // test vector c_n = 1/λ_n, n ≤ 64.
    let c: Vec<f64> = (0..=64).map(|n| 1.0 / geometry.eigenvalue(n)).collect();
    let c_l2 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut stream = derive_stream(seed ^ 0x6b69, 0);
    let mut moment_accs = [
        Accumulator::new(2),
        Accumulator::new(4),
        Accumulator::new(6),
        Accumulator::new(8),
    ];
    for _ in 0..samples.min(100_000) {
        let s: f64 = c.iter().map(|cv| cv * stream.normal()).sum();
        let a = s.abs();
        moment_accs[0].push(a * a);
        moment_accs[1].push(a.powi(4));
        moment_accs[2].push(a.powi(6));
        moment_accs[3].push(a.powi(8));
    }
    for (acc, p) in moment_accs.iter().zip([2.0f64, 4.0, 6.0, 8.0]) {
        let lhs = acc.mean().powf(1.0 / p);
        let bound = p.sqrt() * c_l2;
        if lhs > bound {
            failures.push(format!("Khintchine p={p}: {lhs:.4} > √p‖c‖ = {bound:.4}"));
        }
    }

    out.write_records("field_moments", &records)?;
    println!(
        "field-moments: {} checks failed over N ∈ {:?}",
        failures.len(),
        modes_grid
    );
    for f in &failures {
        println!("  FAIL {f}");
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::StatFail
    })
}

fn wick_moments(
    geometry: Geometry,
    n: usize,
    samples: u64,
    seed: u64,
) -> (Accumulator, Accumulator) {
    let mut mean_acc = Accumulator::new(1);
    let mut sq_acc = Accumulator::new(2);
    let sigma = sigma_integral(&geometry, n);
    let mut stream = derive_stream(seed, 0);
    for _ in 0..samples {
        let mut mass = 0.0;
        for k in 0..=n {
            let g = stream.normal();
            mass += g * g / geometry.eigenvalue_sq(k);
        }
        let w = mass - sigma;
        mean_acc.push(w);
        sq_acc.push(w * w);
    }
    (mean_acc, sq_acc)
}

fn lp_moment(basis: &EigenBasis, n: usize, p: f64, samples: u64, seed: u64) -> McEstimate {
    gibbslab::mc::run_chunked(
        gibbslab::mc::estimator_label(&format!("lp_moment n={n} p={p}")),
        samples,
        DEFAULT_CHUNK_SIZE,
        seed,
        |stream, len, acc| {
            for _ in 0..len {
                let f = sample_field_coeffs(*basis.geometry(), n, stream);
                let lp = gibbslab::field::lp_norm(&f, p, basis).expect("basis covers n");
                acc.push(lp.powf(p));
            }
        },
    )
}

// ------------------------------------------------------------- gibbs-partition

#[allow(clippy::too_many_arguments)]
pub fn gibbs_partition(
    geometry: Geometry,
    p: f64,
    cutoff: f64,
    r: f64,
    modes_grid: &[usize],
    samples: u64,
    seed: u64,
    indicator_inside: bool,
    out: &OutputDir,
) -> Result<Status> {
    let n_top = *modes_grid.iter().max().unwrap();
    let spec0 = GibbsSpec::new(geometry, p, cutoff, n_top).map_err(to_rejection)?;
    let spec0 = spec0.with_density_power(r);
    let diagnostic = spec0.is_supercritical();
    let basis = build_basis(geometry, n_top, default_accuracy(&geometry, n_top))?;
    let mode = if indicator_inside {
        IndicatorMode::Inside
    } else {
        IndicatorMode::Outside
    };
    let mut records = Vec::new();
    let mut estimates = Vec::new();
    for &n in modes_grid {
        let spec = GibbsSpec::new(geometry, p, cutoff, n)
            .map_err(to_rejection)?
            .with_density_power(r);
        let t = Instant::now();
        let est = estimate_partition_with_mode(&spec, &basis, mode, samples, seed)?;
        let wall = t.elapsed().as_millis() as u64;
        println!(
            "gibbs-partition: N={n:5} mean={:.6e} stderr={:?} max={:.3e}{}",
            est.mean,
            est.stderr,
            est.running_max,
            if diagnostic {
                "  [diagnostic: non-normalizable regime]"
            } else {
                ""
            }
        );
        records.push(record("partition", &geometry, &est, wall, |rec| {
            rec.p = Some(p);
            rec.cutoff = Some(cutoff);
            rec.r = Some(r);
            rec.n_cut = Some(n);
            if diagnostic {
                rec.notes.push("diagnostic: non-normalizable regime".into());
            }
            if indicator_inside {
                rec.notes.push("indicator inside exponential".into());
            }
        }));
        estimates.push((n, est));
    }
    out.write_records("partition", &records)?;
    // Stability across truncations; in the supercritical regime the means are
    // diagnostics only and never asserted.
    let mut failures = Vec::new();
    if !diagnostic {
        for i in 0..estimates.len() {
            for j in i + 1..estimates.len() {
                let (na, a) = &estimates[i];
                let (nb, b) = &estimates[j];
                let tol = 3.0 * a.combined_stderr(b);
                if (a.mean - b.mean).abs() > tol {
                    failures.push(format!(
                        "estimates at N={na} and N={nb} differ by {:.3e} > {:.3e}",
                        (a.mean - b.mean).abs(),
                        tol
                    ));
                }
            }
        }
    }
    for f in &failures {
        println!("  FAIL {f}");
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::StatFail
    })
}

fn to_rejection(e: gibbslab::Error) -> ConfigRejection {
    reject(
        e.to_string()
            .split("; ")
            .map(str::to_string)
            .collect::<Vec<_>>(),
    )
}

// -------------------------------------------------------------- gibbs-boundary

pub fn gibbs_boundary(
    geometry: Geometry,
    n: usize,
    cutoffs: &[f64],
    eps_list: &[f64],
    samples: u64,
    seed: u64,
    out: &OutputDir,
) -> Result<Status> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for &k in cutoffs {
        let mut per_eps = Vec::new();
        for &eps in eps_list {
            let t = Instant::now();
            let est = boundary_probability(geometry, n, k, eps, samples, seed)?;
            per_eps.push((eps, est.clone()));
            records.push(record(
                "boundary_probability",
                &geometry,
                &est,
                t.elapsed().as_millis() as u64,
                |rec| {
                    rec.cutoff = Some(k);
                    rec.n_cut = Some(n);
                    rec.notes.push(format!("eps={eps}"));
                },
            ));
        }
        // Linearity in ε: P(2ε) ≈ 2 P(ε) for each available halving pair.
        for i in 0..per_eps.len() {
            for j in 0..per_eps.len() {
                let (ea, a) = &per_eps[i];
                let (eb, b) = &per_eps[j];
                if (ea - 2.0 * eb).abs() < 1e-12 {
                    let diff = a.mean - 2.0 * b.mean;
                    let tol = 4.0
                        * (a.stderr_or_zero().powi(2) + 4.0 * b.stderr_or_zero().powi(2)).sqrt();
                    println!(
                        "gibbs-boundary: K={k} P({ea})={:.5} P({eb})={:.5} |P(2ε)−2P(ε)|={:.2e} tol={:.2e}",
                        a.mean, b.mean, diff.abs(), tol
                    );
                    if diff.abs() > tol {
                        failures.push(format!(
                            "linearity at K={k}: |P(2ε)−2P(ε)| = {:.3e} > {:.3e}",
                            diff.abs(),
                            tol
                        ));
                    }
                }
            }
        }
    }
    out.write_records("boundary", &records)?;
    for f in &failures {
        println!("  FAIL {f}");
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::StatFail
    })
}

// --------------------------------------------------------------- gibbs-tailset

#[allow(clippy::too_many_arguments)]
pub fn gibbs_tailset(
    geometry: Geometry,
    n: usize,
    tail_cut: usize,
    cutoff: f64,
    p: f64,
    samples: u64,
    seed: u64,
    out: &OutputDir,
) -> Result<Status> {
    let basis = build_basis(geometry, tail_cut, default_accuracy(&geometry, tail_cut))?;
    let t = Instant::now();
    let est = tail_set_probability(geometry, n, cutoff, p, tail_cut, &basis, samples, seed)?;
    let wall = t.elapsed().as_millis() as u64;
    let neglected = tail_neglected_variance(&geometry, tail_cut);
    println!(
        "gibbs-tailset: N={n} tail_cut={tail_cut} K={cutoff} p={p}: P = {:.4} ± {:.4} (neglected tail variance ≤ {neglected:.3e})",
        est.mean,
        est.stderr_or_zero()
    );
    let rec = record("tail_set_probability", &geometry, &est, wall, |rec| {
        rec.cutoff = Some(cutoff);
        rec.p = Some(p);
        rec.n_cut = Some(n);
        rec.notes.push(format!(
            "tail_cut={tail_cut}, neglected_variance={neglected}"
        ));
    });
    out.write_records("tailset", &[rec])?;
    let pass = est.mean >= 0.5 - 3.0 * est.stderr_or_zero();
    if !pass {
        println!("  FAIL tail-set probability below 1/2 − 3·stderr");
    }
    Ok(if pass { Status::Pass } else { Status::StatFail })
}

// ---------------------------------------------------------------- drift-lemmas

pub fn drift_lemmas(
    geometry: Geometry,
    m_grid: &[usize],
    n_factor: usize,
    cutoff: f64,
    samples: u64,
    seed: u64,
    out: &OutputDir,
) -> Result<Status> {
    let bump = AnnularBump::new(geometry)?;
    let rows = filter_diagnostics(&bump, m_grid, n_factor)?;
    let mut failures = Vec::new();
    #[derive(serde::Serialize)]
    struct LemmaRow {
        m: usize,
        n_mass: usize,
        n_profile: usize,
        filter_mass: f64,
        amplitude_numerator: f64,
        centered_second_moment: f64,
        pairing_field: f64,
        pairing_filter: f64,
        filter_drift_energy: f64,
        alpha: f64,
        capture: f64,
        cost_filter: f64,
        cost_profile: f64,
        key_prob: f64,
        key_prob_stderr: Option<f64>,
    }
    let mut table = Vec::new();
    let mut key_crossed = None;
    for diag in &rows {
        failures.extend(diag.interval_violations());
        let n_prof = diag.n_profile;
        let coupling = ou_coupling(geometry, diag.m, n_prof)?;
        let spectrum = project_profile_modes(&bump, diag.m as f64, n_prof)?;
        let plan = DriftPlan::build(coupling, &spectrum, cutoff)?;
        let key = key_probability(&plan, samples, seed);
        if key_crossed.is_none() && key.mean >= 0.5 {
            key_crossed = Some(diag.m);
        }
        println!(
            "drift-lemmas: M={:3} N_mass={:5} N_prof={:6} alpha={:.3} key_prob={:.4}",
            diag.m, diag.n_mass, diag.n_profile, diag.alpha, key.mean
        );
        table.push(LemmaRow {
            m: diag.m,
            n_mass: diag.n_mass,
            n_profile: diag.n_profile,
            filter_mass: diag.filter_mass,
            amplitude_numerator: diag.amplitude_numerator,
            centered_second_moment: diag.centered_second_moment,
            pairing_field: diag.pairing_field,
            pairing_filter: diag.pairing_filter,
            filter_drift_energy: diag.filter_drift_energy,
            alpha: diag.alpha,
            capture: diag.capture,
            cost_filter: diag.cost_filter,
            cost_profile: diag.cost_profile,
            key_prob: key.mean,
            key_prob_stderr: key.stderr,
        });
    }
    out.write_csv_rows("drift_lemmas.csv", &table)?;
    out.write_json(
        "drift_lemmas_meta.json",
        &json!({
            "m_grid": m_grid,
            "n_factor": n_factor,
            "cutoff": cutoff,
            "samples": samples,
            "seed": seed,
            "smallest_m_with_key_prob_half": key_crossed,
        }),
    )?;
    match key_crossed {
        Some(m) => println!("drift-lemmas: key probability crosses 1/2 at M = {m}"),
        None => failures.push("key probability never reached 1/2 on the M grid".into()),
    }
    for f in &failures {
        println!("  FAIL {f}");
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::StatFail
    })
}

// --------------------------------------------------------------- drift-diverge

#[allow(clippy::too_many_arguments)]
pub fn drift_diverge(
    geometry: Geometry,
    p_list: &[f64],
    cutoff: f64,
    m_grid: &[usize],
    samples: u64,
    seed: u64,
    out: &OutputDir,
) -> Result<Status> {
    for &p in p_list {
        if !geometry.admissible_p(p) {
            return Err(reject(vec![format!(
                "p = {p} outside the admissible range for d = {}",
                geometry.dim()
            )])
            .into());
        }
    }
    let accuracy = default_accuracy(
        &geometry,
        capture_n(&geometry, *m_grid.iter().max().unwrap() as f64),
    );
    let scan = divergence_scan(geometry, p_list, cutoff, m_grid, samples, seed, accuracy)?;
    out.write_csv_rows("drift_diverge.csv", &scan.rows)?;
    out.write_json(
        "drift_diverge_meta.json",
        &json!({
            "p_list": p_list,
            "cutoff": cutoff,
            "m_grid": m_grid,
            "samples": samples,
            "seed": seed,
            "basis_accuracy": accuracy,
            "fits": scan.fits,
        }),
    )?;
    for row in &scan.rows {
        let stamp = if row.p >= geometry.critical_exponent() {
            "  [diagnostic: non-normalizable regime]"
        } else {
            ""
        };
        println!(
            "drift-diverge: p={} M={:3} N={:5} objective={:+.3e} gain={:.3e} cost={:.3e} key={:.3}{stamp}",
            row.p, row.m, row.n_cut, row.objective_mean, row.gain_mean, row.cost, row.key_prob
        );
    }
    for fit in &scan.fits {
        println!(
            "drift-diverge: p={} gain-exponent={:.3} cost-exponent={:.3} divergence-exponent={:?}",
            fit.p, fit.gain_exponent, fit.cost_exponent, fit.divergence_exponent
        );
    }
    Ok(Status::Pass)
}

// ----------------------------------------------------------------------- report

pub fn aggregate_report(dir: &std::path::Path, out_file: &std::path::Path) -> Result<Status> {
    let mut rows: Vec<RunRecord> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
            for line in std::fs::read_to_string(&path)?.lines() {
                if line.trim().is_empty() {
                    continue;
                }
                rows.push(serde_json::from_str(line)?);
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.op.clone(), a.n_cut, a.m)
            .partial_cmp(&(b.op.clone(), b.n_cut, b.m))
            .unwrap()
    });
    let mut md = String::from("# Run summary\n\n| op | dim | p | K | N | M | samples | mean | stderr | max |\n|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {:.6e} | {} | {:.3e} |\n",
            r.op,
            r.dim,
            r.p.map(|v| v.to_string()).unwrap_or_default(),
            r.cutoff.map(|v| v.to_string()).unwrap_or_default(),
            r.n_cut.map(|v| v.to_string()).unwrap_or_default(),
            r.m.map(|v| v.to_string()).unwrap_or_default(),
            r.samples,
            r.mean,
            r.stderr.map(|v| format!("{v:.2e}")).unwrap_or_default(),
            r.running_max,
        ));
    }
    std::fs::write(out_file, md)?;
    println!("report: {} records -> {}", rows.len(), out_file.display());
    Ok(Status::Pass)
}
