//! Reproducible experiment runner for state-based classical shadows.
//!
//! Subcommands: `estimate`, `verify`, `moments`, `distinguish`, `sweep`.
//! Every output embeds the config hash, the seed, and the crate version, and
//! re-running with identical inputs reproduces identical bytes; the worker
//! count never changes results.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use bell_shadows_core::distinguishers::distinguisher_report;
use bell_shadows_core::error::Error as CoreError;
use bell_shadows_core::moments::{
    additive_epsilon, conversion_report, ensemble_moment, relative_epsilon, Ensemble, MomentMode,
};
use bell_shadows_core::rng::RngStream;
use bell_shadows_core::shadows::{
    estimate_observable, estimate_observable_recorded, plan, BoundKind, EstimatorConfig,
    StateSource,
};
use bell_shadows_core::verify::{run_suite, Level};

use config::{
    load_config, DistinguishConfig, EstimateConfig, MomentsConfig, SweepConfig,
};

const EXIT_VERIFY_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_DIMENSION_ERROR: u8 = 3;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG_ERROR,
            message: message.into(),
        }
    }

    fn dimension(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DIMENSION_ERROR,
            message: message.into(),
        }
    }

    fn from_core(err: CoreError) -> Self {
        let code = match err {
            CoreError::DimMismatch(_)
            | CoreError::SizeLimit(_)
            | CoreError::LengthMismatch { .. } => EXIT_DIMENSION_ERROR,
            _ => EXIT_CONFIG_ERROR,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }

    fn io(err: std::io::Error) -> Self {
        Self {
            code: EXIT_CONFIG_ERROR,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bell-shadows",
    about = "State-based classical shadow tomography experiments",
    version
)]
struct Cli {
    /// Rayon worker threads (0 = default). Never changes numeric results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimator described by a config file.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, value_parser = parse_level, default_value = "full")]
        level: Level,
        #[arg(long, default_value_t = 20_240_811)]
        seed: u64,
    },
    /// Moment analysis: design distances and conversion flags.
    Moments {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Distinguisher run against the Haar baseline.
    Distinguish {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid over mixture strength and accuracy targets, one CSV row per cell.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_level(s: &str) -> Result<Level, String> {
    match s {
        "quick" => Ok(Level::Quick),
        "full" => Ok(Level::Full),
        other => Err(format!("unknown level '{other}', expected quick|full")),
    }
}

#[derive(Serialize)]
struct Meta {
    config_hash: String,
    seed: u64,
    version: String,
}

impl Meta {
    fn new(config_bytes: &[u8], seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        Self {
            config_hash: format!("{:x}", hasher.finalize()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# config_hash={} seed={} version={}\n",
            self.config_hash, self.seed, self.version
        )
    }
}

#[derive(Serialize)]
struct Enveloped<T: Serialize> {
    meta: Meta,
    report: T,
}

fn write_json<T: Serialize>(path: &Path, meta: Meta, report: T) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(&Enveloped { meta, report })
        .map_err(|e| CliError::config(e.to_string()))?;
    std::fs::write(path, body + "\n").map_err(CliError::io)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        // Results do not depend on the pool size; this only tunes throughput.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    ensure_out_dir(&cli.out)?;
    match cli.command {
        Command::Estimate { config, seed } => cmd_estimate(&config, seed, &cli.out),
        Command::Verify { level, seed } => cmd_verify(level, seed, &cli.out),
        Command::Moments { config, seed } => cmd_moments(&config, seed, &cli.out),
        Command::Distinguish { config, seed } => cmd_distinguish(&config, seed, &cli.out),
        Command::Sweep { config, seed } => cmd_sweep(&config, seed, &cli.out),
    }
}

fn cmd_estimate(
    config_path: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let (cfg, bytes) = load_config::<EstimateConfig>(config_path)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let ensemble = cfg.ensemble.resolve(cfg.n)?;
    let rho = cfg.rho.resolve(cfg.n)?;
    let source = StateSource::from_density(rho).map_err(CliError::from_core)?;
    let observable = cfg.observable.resolve(cfg.n)?;

    let mut estimator: EstimatorConfig =
        plan(cfg.gamma, cfg.delta, cfg.bound, &observable).map_err(CliError::from_core)?;
    if let Some(total) = cfg.shots_override {
        if total == 0 {
            return Err(CliError::config("shots_override must be positive"));
        }
        estimator.l = (total as usize).div_ceil(estimator.k).max(1);
    }

    let (report, records) =
        estimate_observable_recorded(&source, &ensemble, &observable, &estimator, seed)
            .map_err(CliError::from_core)?;

    let meta = Meta::new(&bytes, seed);
    let mut csv = meta.csv_header();
    csv.push_str("shot_id,ensemble_key,x,z,estimate\n");
    for r in &records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.shot_id, r.ensemble_key, r.x, r.z, r.estimate
        );
    }
    std::fs::write(out.join("shots.csv"), csv).map_err(CliError::io)?;
    write_json(&out.join("estimate_report.json"), meta, &report)?;

    println!(
        "estimate = {:.6} (K={}, L={}, shots={})",
        report.estimate, report.k, report.l, report.total_shots
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(level: Level, seed: u64, out: &Path) -> Result<ExitCode, CliError> {
    let results = run_suite(level, seed).map_err(CliError::from_core)?;
    for r in &results {
        println!("{}", r.summary_line());
    }
    let all_passed = results.iter().all(|r| r.passed);
    let meta = Meta::new(format!("verify level={level:?}").as_bytes(), seed);
    write_json(&out.join("verify.json"), meta, &results)?;
    println!(
        "{}/{} checks passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILURE)
    })
}

#[derive(Serialize)]
struct MomentsReport {
    ensemble: String,
    n: usize,
    t: usize,
    sym_dim: usize,
    eps_add: f64,
    eps_rel: f64,
    add_le_rel: bool,
    rel_le_dim_add: bool,
}

fn cmd_moments(
    config_path: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let (cfg, bytes) = load_config::<MomentsConfig>(config_path)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let ensemble = cfg.ensemble.resolve(cfg.n)?;
    let rng = RngStream::from_seed(seed);
    let moment =
        ensemble_moment(&ensemble, cfg.t, MomentMode::Exact, &rng).map_err(CliError::from_core)?;
    let report = conversion_report(&moment).map_err(CliError::from_core)?;
    let payload = MomentsReport {
        ensemble: ensemble.name().to_string(),
        n: report.n,
        t: report.t,
        sym_dim: report.sym_dim,
        eps_add: report.eps_add,
        eps_rel: report.eps_rel,
        add_le_rel: report.add_le_rel,
        rel_le_dim_add: report.rel_le_dim_add,
    };
    println!(
        "{} n={} t={}: eps_add={:.6e}, eps_rel={:.6e}, dim(Sym)={}, bounds_ok={}",
        payload.ensemble,
        payload.n,
        payload.t,
        payload.eps_add,
        payload.eps_rel,
        payload.sym_dim,
        report.bounds_ok()
    );
    write_json(&out.join("moments_report.json"), Meta::new(&bytes, seed), &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_distinguish(
    config_path: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let (cfg, bytes) = load_config::<DistinguishConfig>(config_path)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let ensemble = cfg.ensemble.resolve(cfg.n)?;
    let rho = cfg.rho.resolve(cfg.n)?;
    let source = StateSource::from_density(rho).map_err(CliError::from_core)?;
    let observable = cfg.observable.resolve(cfg.n)?;
    let report = distinguisher_report(&ensemble, &source, &observable, cfg.shots, seed)
        .map_err(CliError::from_core)?;
    println!(
        "p(ensemble)={:.4}, p(haar)={:.4}, advantage={:.4} ± {:.4}",
        report.p_accept_ensemble, report.p_accept_haar, report.advantage, report.std_error
    );
    write_json(
        &out.join("distinguisher_report.json"),
        Meta::new(&bytes, seed),
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    config_path: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let (cfg, bytes) = load_config::<SweepConfig>(config_path)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    if cfg.runs == 0 {
        return Err(CliError::config("runs must be positive"));
    }
    let rho = cfg.rho.resolve(cfg.n)?;
    let source = StateSource::from_density(rho).map_err(CliError::from_core)?;
    let observable = cfg.observable.resolve(cfg.n)?;
    let truth = source.density().expectation_of(observable.matrix());
    let base = RngStream::from_seed(seed);

    let meta = Meta::new(&bytes, seed);
    let mut csv = meta.csv_header();
    csv.push_str(
        "epsilon0,gamma,delta,bound,eps,k,l,total_shots,runs,failures,failure_fraction,tolerance,true_value,mean_estimate\n",
    );

    let mut cell = 0u64;
    for &eps0 in &cfg.epsilon0_grid {
        let mut cell_stream = base.substream(cell << 32);
        let psi = bell_shadows_core::states::haar_sample(cfg.n, &mut cell_stream);
        let ensemble = Ensemble::adversarial_mixture(eps0, psi).map_err(CliError::from_core)?;
        let m3 = ensemble_moment(&ensemble, 3, MomentMode::Exact, &base)
            .map_err(CliError::from_core)?;
        let (eps, bound) = match cfg.bound.as_str() {
            "additive" => {
                let eps = additive_epsilon(&m3).map_err(CliError::from_core)?;
                (eps, BoundKind::Additive { epsilon: eps })
            }
            "relative" => {
                let eps = relative_epsilon(&m3).map_err(CliError::from_core)?;
                (eps, BoundKind::Relative { epsilon: eps })
            }
            other => {
                return Err(CliError::config(format!(
                    "sweep bound must be additive|relative, got '{other}'"
                )))
            }
        };
        for &gamma in &cfg.gamma_grid {
            for &delta in &cfg.delta_grid {
                cell += 1;
                let estimator =
                    plan(gamma, delta, bound, &observable).map_err(CliError::from_core)?;
                let tolerance = gamma + bound.bias_bound(&observable);
                let mut failures = 0usize;
                let mut mean_estimate = 0.0;
                for run in 0..cfg.runs {
                    let run_seed = base.substream(cell << 20 | run as u64).key();
                    let report =
                        estimate_observable(&source, &ensemble, &observable, &estimator, run_seed)
                            .map_err(CliError::from_core)?;
                    mean_estimate += report.estimate;
                    if (report.estimate - truth).abs() > tolerance {
                        failures += 1;
                    }
                }
                mean_estimate /= cfg.runs as f64;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    eps0,
                    gamma,
                    delta,
                    cfg.bound,
                    eps,
                    estimator.k,
                    estimator.l,
                    estimator.total_shots(),
                    cfg.runs,
                    failures,
                    failures as f64 / cfg.runs as f64,
                    tolerance,
                    truth,
                    mean_estimate
                );
            }
        }
    }
    std::fs::write(out.join("sweep.csv"), csv).map_err(CliError::io)?;
    println!("sweep complete: {cell} cells, {} runs each", cfg.runs);
    Ok(ExitCode::SUCCESS)
}
