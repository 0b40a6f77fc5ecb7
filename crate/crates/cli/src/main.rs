//! Experiment driver: subcommands map one-to-one onto the library's
//! verifiable claims. Every run writes a reproducibility manifest; exit codes
//! are 0 (pass), 1 (statistical check failure), 2 (config or resolution
//! error).

mod commands;
mod config;
mod output;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use commands::Status;
use config::{pick, pick_opt, FileConfig};
use gibbslab::report::Manifest;
use output::{Format, OutputDir};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gibbslab",
    version,
    about = "Spectral Gibbs-measure experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    radial: bool,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format: jsonl, csv, or both.
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (the GIBBS_THREADS environment variable overrides).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a basis and run the orthonormality / eigen-residual / L^p suites.
    BasisVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sampled-field invariants: Wick centering, chaos variance, Cauchy rate,
    /// L^p moment stability, and the Khintchine bound.
    FieldMoments {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        modes_grid: Option<Vec<usize>>,
    },
    /// Monte Carlo partition function across a truncation grid.
    GibbsPartition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "cutoff-K")]
        cutoff_k: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        modes_grid: Option<Vec<usize>>,
        /// Place the cutoff indicator inside the exponential.
        #[arg(long)]
        indicator_inside: bool,
    },
    /// Probability that the Wick mass lands in a window [K−ε, K+ε].
    GibbsBoundary {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long = "cutoff-K", value_delimiter = ',')]
        cutoff_list: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Tail-set probability over modes N < n ≤ tail_cut.
    GibbsTailset {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        tail_cut: Option<usize>,
        #[arg(long = "cutoff-K")]
        cutoff_k: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Closed-form filter diagnostics, amplitude, and cutoff survival
    /// probability across an M grid.
    DriftLemmas {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M-grid", value_delimiter = ',')]
        m_grid: Option<Vec<usize>>,
        #[arg(long = "N-factor")]
        n_factor: Option<usize>,
        #[arg(long = "cutoff-K")]
        cutoff_k: Option<f64>,
    },
    /// Variational-objective scan over (p, M) with scaling fits.
    DriftDiverge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        p_list: Option<Vec<f64>>,
        #[arg(long = "cutoff-K")]
        cutoff_k: Option<f64>,
        #[arg(long = "M-grid", value_delimiter = ',')]
        m_grid: Option<Vec<usize>>,
    },
    /// Aggregate JSONL records from a directory into a markdown summary.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "summary.md")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::StatFail) => ExitCode::from(1),
        Err(err) => {
            if let Some(rej) = err.downcast_ref::<config::ConfigRejection>() {
                eprintln!("{rej}");
            } else if let Some(lib) = err.downcast_ref::<gibbslab::Error>() {
                eprintln!("{}", json!({"error": "run", "message": lib.to_string()}));
            } else {
                eprintln!("{}", json!({"error": "run", "message": err.to_string()}));
            }
            ExitCode::from(2)
        }
    }
}

struct Resolved {
    geometry: gibbslab::Geometry,
    samples: u64,
    seed: u64,
    out: OutputDir,
    file: FileConfig,
}

fn resolve(common: &Common, default_out: &str) -> Result<Resolved> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = std::env::var("GIBBS_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .or(common.threads)
        .or(file.threads);
    if let Some(t) = threads {
        // Ignore the error if a pool was already installed (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let dim = pick(common.dim, file.dim, 1);
    let radial = common.radial || file.radial.unwrap_or(false);
    let geometry = config::resolve_geometry(dim, radial).map_err(anyhow::Error::from)?;
    let samples = pick(common.samples, file.samples, 100_000);
    let seed = pick(common.seed, file.seed, 1);
    let format = pick_opt(
        common.format,
        file.format
            .as_deref()
            .map(|s| s.parse())
            .transpose()
            .map_err(anyhow::Error::msg)?,
    )
    .unwrap_or(Format::Both);
    let out_dir = pick(
        common.out_dir.clone(),
        file.out_dir.clone(),
        PathBuf::from(default_out),
    );
    let out = OutputDir::create(&out_dir, format)?;
    Ok(Resolved {
        geometry,
        samples,
        seed,
        out,
        file,
    })
}

fn write_manifest(
    r: &Resolved,
    command: &str,
    config: serde_json::Value,
    tolerances: serde_json::Value,
) -> Result<()> {
    r.out.write_manifest(&Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config,
        seed: r.seed,
        chunk_size: gibbslab::mc::DEFAULT_CHUNK_SIZE,
        tolerances,
    })
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::BasisVerify { common, nmax, tol } => {
            let r = resolve(&common, "runs/basis-verify")?;
            let nmax = pick(nmax, r.file.nmax, 64);
            let tol = pick(
                tol,
                r.file.tol,
                commands::default_accuracy(&r.geometry, nmax),
            );
            write_manifest(
                &r,
                "basis-verify",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "nmax": nmax, "tol": tol}),
                json!({"orthonormality": tol, "eigen_residual": gibbslab::basis::RESIDUAL_TOL}),
            )?;
            commands::basis_verify(r.geometry, nmax, tol, &r.out)
        }
        Command::FieldMoments { common, modes_grid } => {
            let r = resolve(&common, "runs/field-moments")?;
            let grid = pick(modes_grid, r.file.modes_grid.clone(), vec![8, 64, 512]);
            write_manifest(
                &r,
                "field-moments",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "modes_grid": grid, "samples": r.samples, "seed": r.seed}),
                json!({"moment_sigmas": 4.0}),
            )?;
            commands::field_moments(r.geometry, &grid, r.samples, r.seed, &r.out)
        }
        Command::GibbsPartition {
            common,
            p,
            cutoff_k,
            r: rr,
            modes_grid,
            indicator_inside,
        } => {
            let r = resolve(&common, "runs/gibbs-partition")?;
            let p = pick(p, r.file.p, 4.0);
            let k = pick(cutoff_k, r.file.cutoff_k, 1.0);
            let dens = pick(rr, r.file.r, 1.0);
            let grid = pick(modes_grid, r.file.modes_grid.clone(), vec![16, 64, 256]);
            let inside = indicator_inside || r.file.indicator_inside.unwrap_or(false);
            write_manifest(
                &r,
                "gibbs-partition",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "p": p, "cutoff_k": k, "r": dens, "modes_grid": grid, "samples": r.samples, "seed": r.seed, "indicator_inside": inside}),
                json!({"stability_sigmas": 3.0}),
            )?;
            commands::gibbs_partition(
                r.geometry, p, k, dens, &grid, r.samples, r.seed, inside, &r.out,
            )
        }
        Command::GibbsBoundary {
            common,
            modes,
            cutoff_list,
            eps,
        } => {
            let r = resolve(&common, "runs/gibbs-boundary")?;
            let n = pick(modes, r.file.modes, 64);
            let ks = pick(cutoff_list, r.file.cutoff_list.clone(), vec![0.5, 1.0, 2.0]);
            let eps = pick(eps, r.file.eps_list.clone(), vec![0.2, 0.1]);
            write_manifest(
                &r,
                "gibbs-boundary",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "modes": n, "cutoffs": ks, "eps": eps, "samples": r.samples, "seed": r.seed}),
                json!({"linearity_sigmas": 4.0}),
            )?;
            commands::gibbs_boundary(r.geometry, n, &ks, &eps, r.samples, r.seed, &r.out)
        }
        Command::GibbsTailset {
            common,
            modes,
            tail_cut,
            cutoff_k,
            p,
        } => {
            let r = resolve(&common, "runs/gibbs-tailset")?;
            let n = pick(modes, r.file.modes, 64);
            let tail = pick(tail_cut, r.file.tail_cut, 8 * n);
            let k = pick(cutoff_k, r.file.cutoff_k, 1.0);
            let p = pick(p, r.file.p, 4.0);
            write_manifest(
                &r,
                "gibbs-tailset",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "modes": n, "tail_cut": tail, "cutoff_k": k, "p": p, "samples": r.samples, "seed": r.seed}),
                json!({"threshold": 0.5, "sigmas": 3.0}),
            )?;
            commands::gibbs_tailset(r.geometry, n, tail, k, p, r.samples, r.seed, &r.out)
        }
        Command::DriftLemmas {
            common,
            m_grid,
            n_factor,
            cutoff_k,
        } => {
            let r = resolve(&common, "runs/drift-lemmas")?;
            let grid = pick(m_grid, r.file.m_grid.clone(), vec![16, 32, 64, 128, 256]);
            let nf = pick(n_factor, r.file.n_factor, 8);
            let k = pick(cutoff_k, r.file.cutoff_k, 1.0);
            write_manifest(
                &r,
                "drift-lemmas",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "m_grid": grid, "n_factor": nf, "cutoff_k": k, "samples": r.samples, "seed": r.seed}),
                serde_json::to_value(json!({
                    "filter_mass": gibbslab::drift::intervals::FILTER_MASS,
                    "amplitude_numerator": gibbslab::drift::intervals::AMPLITUDE_NUMERATOR,
                    "centered_second_moment": gibbslab::drift::intervals::CENTERED_SECOND_MOMENT,
                    "pairing": gibbslab::drift::intervals::PAIRING,
                    "filter_drift_energy": gibbslab::drift::intervals::FILTER_DRIFT_ENERGY,
                    "drift_cost": gibbslab::drift::intervals::DRIFT_COST,
                    "alpha": gibbslab::drift::intervals::ALPHA,
                }))?,
            )?;
            commands::drift_lemmas(r.geometry, &grid, nf, k, r.samples, r.seed, &r.out)
        }
        Command::DriftDiverge {
            common,
            p_list,
            cutoff_k,
            m_grid,
        } => {
            let r = resolve(&common, "runs/drift-diverge")?;
            let ps = pick(p_list, r.file.p_list.clone(), vec![8.0, 4.0]);
            let k = pick(cutoff_k, r.file.cutoff_k, 1.0);
            let grid = pick(m_grid, r.file.m_grid.clone(), vec![16, 32, 64]);
            write_manifest(
                &r,
                "drift-diverge",
                json!({"dim": r.geometry.dim(), "radial": r.geometry.is_radial(), "p_list": ps, "cutoff_k": k, "m_grid": grid, "samples": r.samples, "seed": r.seed}),
                json!({"fit_window": "objective < 0 rows"}),
            )?;
            commands::drift_diverge(r.geometry, &ps, k, &grid, r.samples, r.seed, &r.out)
        }
        Command::Report { dir, out } => commands::aggregate_report(&dir, &out),
    }
}
