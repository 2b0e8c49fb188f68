//! Command-line runner for the passive-scalar simulation toolkit.
//!
//! Experiments are driven by a TOML run-configuration (see `config.rs`)
//! plus `--seed`, `--threads`, `--out` flag overrides. Every run writes
//! its CSV artifacts and a manifest (config hash, seed, version, wall
//! time) into the output directory. All randomness flows from the single
//! root seed through named derivation paths, so identical configs give
//! byte-identical CSVs at any thread count.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure,
//! 4 acceptance failure in self-test, 1 I/O or other failure.

mod config;
mod experiments;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

use config::{Experiment, RunConfig};
use experiments::CliError;

#[derive(Parser)]
#[command(
    name = "kraichnan",
    version,
    about = "Stochastic passive-scalar simulation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonArgs {
    /// Run-configuration TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Override the root seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the sample loops (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (also via KRAICHNAN_OUT; flag wins).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// t·Γ_t(0,0) along one noise motion (constant-kernel closed form).
    GammaTrajectory(CommonArgs),
    /// Feynman–Kac solve at probe points.
    FkSolve(CommonArgs),
    /// Fourier-space solve of the mean field.
    SpectralSolve(CommonArgs),
    /// Wong–Zakai mollification convergence study.
    WzConverge(CommonArgs),
    /// Macroscopic fractal-dimension estimate of a time set.
    DimEstimate(CommonArgs),
    /// ν → 0 limit tables.
    NuLimit(CommonArgs),
    /// Walsh-isometry variance check.
    WalshCheck(CommonArgs),
    /// Run the acceptance suite (exit 4 on any failure).
    SelfTest {
        /// Run a single criterion (1..=13) instead of the whole suite.
        #[arg(long)]
        criterion: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fnv_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

fn resolve_out(flag: Option<PathBuf>, config_out: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("KRAICHNAN_OUT").map(PathBuf::from))
        .or(config_out)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_manifest(
    out_dir: &std::path::Path,
    experiment: &str,
    config_hash: u64,
    seed: u64,
    threads: Option<usize>,
    wall_ms: u128,
    artifacts: &[PathBuf],
) -> Result<(), CliError> {
    use std::io::Write;
    let mut buf = Vec::new();
    writeln!(buf, "experiment = \"{experiment}\"")?;
    writeln!(buf, "config-hash = \"{config_hash:016x}\"")?;
    writeln!(buf, "seed = {seed}")?;
    writeln!(buf, "version = \"{}\"", env!("CARGO_PKG_VERSION"))?;
    writeln!(
        buf,
        "threads = \"{}\"",
        threads.map_or("default".to_string(), |t| t.to_string())
    )?;
    writeln!(buf, "wall-ms = {wall_ms}")?;
    for a in artifacts {
        writeln!(buf, "artifact = \"{}\"", a.display())?;
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join(format!("{experiment}-manifest.toml")), buf)?;
    Ok(())
}

fn run_experiment(expected: Experiment, args: &CommonArgs) -> Result<(), CliError> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("cannot read config {:?}: {e}", args.config)))?;
    let mut config = RunConfig::parse(&raw).map_err(CliError::config)?;
    if config.experiment != expected {
        return Err(CliError::config(format!(
            "config declares experiment \"{}\" but the subcommand is \"{}\"",
            config.experiment.name(),
            expected.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = resolve_out(args.out.clone(), config.out.clone());
    let mut hash_input = raw.into_bytes();
    hash_input.extend_from_slice(&config.seed.to_le_bytes());
    let config_hash = fnv_hash(&hash_input);
    let start = Instant::now();
    let artifacts = match args.threads {
        Some(n) => kraichnan_core::exec::with_threads(n, || experiments::run(&config, &out_dir)),
        None => experiments::run(&config, &out_dir),
    }?;
    write_manifest(
        &out_dir,
        expected.name(),
        config_hash,
        config.seed,
        args.threads,
        start.elapsed().as_millis(),
        &artifacts,
    )?;
    for a in &artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}

fn run_self_test(
    criterion: Option<usize>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let out_dir = resolve_out(out, None);
    let start = Instant::now();
    let result = match threads {
        Some(n) => {
            kraichnan_core::exec::with_threads(n, || experiments::self_test(&out_dir, criterion))
        }
        None => experiments::self_test(&out_dir, criterion),
    };
    let artifacts = result?;
    write_manifest(
        &out_dir,
        "self-test",
        0,
        kraichnan_core::acceptance::MASTER_SEED,
        threads,
        start.elapsed().as_millis(),
        &artifacts,
    )?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GammaTrajectory(args) => run_experiment(Experiment::GammaTrajectory, args),
        Command::FkSolve(args) => run_experiment(Experiment::FkSolve, args),
        Command::SpectralSolve(args) => run_experiment(Experiment::SpectralSolve, args),
        Command::WzConverge(args) => run_experiment(Experiment::WzConverge, args),
        Command::DimEstimate(args) => run_experiment(Experiment::DimEstimate, args),
        Command::NuLimit(args) => run_experiment(Experiment::NuLimit, args),
        Command::WalshCheck(args) => run_experiment(Experiment::WalshCheck, args),
        Command::SelfTest {
            criterion,
            threads,
            out,
        } => run_self_test(*criterion, *threads, out.clone()),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
