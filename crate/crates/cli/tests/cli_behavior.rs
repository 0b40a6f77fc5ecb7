//! End-to-end behavior of the command-line driver: exit codes, config
//! rejection payloads, diagnostic stamps, and manifests.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gibbslab"));
    c.env_remove("GIBBS_THREADS");
    c
}

#[test]
fn basis_verify_passes_for_both_geometries() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "basis-verify",
            "--dim",
            "1",
            "--nmax",
            "64",
            "--tol",
            "1e-10",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("basis_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["dim"], 1);
    assert_eq!(report["n_max"], 64);
    assert!(report["max_orthonormality_error"].as_f64().unwrap() <= 1e-10);
    assert!(report["max_eigen_residual"].as_f64().unwrap() <= 1e-4);

    let dir2 = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "basis-verify",
            "--dim",
            "2",
            "--radial",
            "--nmax",
            "32",
            "--tol",
            "1e-8",
            "--out-dir",
        ])
        .arg(dir2.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn non_radial_high_dimension_rejected() {
    let out = bin()
        .args(["basis-verify", "--dim", "2", "--nmax", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    let violations = err["violations"].as_array().unwrap();
    assert!(violations
        .iter()
        .any(|v| v.as_str().unwrap().contains("radial")));
}

#[test]
fn supercritical_p_for_d3_rejected_with_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "gibbs-partition",
            "--dim",
            "3",
            "--radial",
            "--p",
            "7",
            "--cutoff-K",
            "1",
            "--modes-grid",
            "4",
            "--samples",
            "100",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v.as_str().unwrap().contains("2d/(d-2)")));
}

#[test]
fn supercritical_run_carries_diagnostic_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "gibbs-partition",
            "--dim",
            "1",
            "--p",
            "8",
            "--cutoff-K",
            "1",
            "--modes-grid",
            "16",
            "--samples",
            "2000",
            "--seed",
            "3",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("diagnostic: non-normalizable regime"));
    let jsonl = std::fs::read_to_string(dir.path().join("partition.jsonl")).unwrap();
    assert!(jsonl.contains("diagnostic: non-normalizable regime"));
    // Subcritical single-N run carries no stamp.
    let dir2 = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "gibbs-partition",
            "--dim",
            "1",
            "--p",
            "4",
            "--cutoff-K",
            "1",
            "--modes-grid",
            "16",
            "--samples",
            "2000",
            "--seed",
            "3",
            "--out-dir",
        ])
        .arg(dir2.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("diagnostic"));
}

#[test]
fn manifest_written_with_reproduction_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "gibbs-boundary",
            "--dim",
            "1",
            "--modes",
            "16",
            "--cutoff-K",
            "1",
            "--eps",
            "0.2,0.1",
            "--samples",
            "20000",
            "--seed",
            "9",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "gibbs-boundary");
    assert_eq!(manifest["seed"], 9);
    assert!(manifest["tool_version"].as_str().is_some());
    assert!(manifest["chunk_size"].as_u64().unwrap() > 0);
    assert_eq!(manifest["config"]["modes"], 16);
    // CSV and JSONL both present with a header/data.
    assert!(dir.path().join("boundary.csv").exists());
    assert!(dir.path().join("boundary.jsonl").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "dim": 1,
            "p": 4.0,
            "cutoff_k": 1.0,
            "modes_grid": [8],
            "samples": 1000,
            "seed": 5
        })
        .to_string(),
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    // Flag overrides the config's sample count.
    let out = bin()
        .args(["gibbs-partition", "--config"])
        .arg(&cfg)
        .args(["--samples", "2500", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["samples"], 2500);
    assert_eq!(manifest["config"]["p"], 4.0);
}

#[test]
fn threads_env_overrides_and_results_match() {
    // GIBBS_THREADS must override --threads, and the estimate must be
    // identical either way.
    let run = |env: Option<&str>, threads: &str, dir: &Path| {
        let mut c = bin();
        c.args([
            "gibbs-partition",
            "--dim",
            "1",
            "--p",
            "8",
            "--cutoff-K",
            "1",
            "--modes-grid",
            "8",
            "--samples",
            "5000",
            "--seed",
            "21",
            "--threads",
            threads,
            "--out-dir",
        ])
        .arg(dir);
        if let Some(v) = env {
            c.env("GIBBS_THREADS", v);
        }
        let out = c.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        std::fs::read_to_string(dir.join("partition.jsonl")).unwrap()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run(Some("1"), "4", d1.path());
    let b = run(None, "2", d2.path());
    let strip = |s: &str| {
        s.lines()
            .map(|l| {
                let rec: gibbslab::report::RunRecord = serde_json::from_str(l).unwrap();
                serde_json::to_string(&rec.without_wall_time()).unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn drift_diverge_radial_critical_exponent_runs() {
    // d = 2 radial at p = p*(2) = 4: the scan runs, stamps the regime, and
    // reports the trend (no shape assertion at this scale).
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "drift-diverge",
            "--dim",
            "2",
            "--radial",
            "--p-list",
            "4",
            "--cutoff-K",
            "1",
            "--M-grid",
            "8,16",
            "--samples",
            "4000",
            "--seed",
            "13",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("diagnostic: non-normalizable regime"));
    assert!(dir.path().join("drift_diverge.csv").exists());
    assert!(dir.path().join("drift_diverge_meta.json").exists());
}

#[test]
fn report_aggregates_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    bin()
        .args([
            "gibbs-partition",
            "--dim",
            "1",
            "--p",
            "8",
            "--cutoff-K",
            "1",
            "--modes-grid",
            "8,16",
            "--samples",
            "1000",
            "--seed",
            "2",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    let summary = dir.path().join("summary.md");
    let out = bin()
        .args(["report", "--dir"])
        .arg(dir.path())
        .args(["--out"])
        .arg(&summary)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let md = std::fs::read_to_string(&summary).unwrap();
    assert!(md.contains("| op |"));
    assert!(md.contains("partition"));
}
